from __future__ import annotations

import datetime as dt

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vesselkg.documents import (
    SCHEMA_VERSION,
    SchemaError,
    dump_document,
    format_timestamp,
    load_document,
    parse_timestamp,
)


def test_dump_is_deterministic_and_key_sorted():
    doc = {"b": 1, "a": {"z": [3, 2], "y": None}, "schema_version": SCHEMA_VERSION}
    out = dump_document(doc)
    assert out == dump_document(dict(reversed(list(doc.items()))))
    assert out.index('"a"') < out.index('"b"') < out.index('"schema_version"')
    assert " " not in out


def test_round_trip():
    doc = {"schema_version": SCHEMA_VERSION, "kind": "x", "values": [1.5, "ø"]}
    assert load_document(dump_document(doc)) == doc


def test_load_rejects_bad_json():
    with pytest.raises(SchemaError):
        load_document("{not json")


def test_load_rejects_non_object():
    with pytest.raises(SchemaError):
        load_document("[1,2]")


def test_load_rejects_wrong_version():
    with pytest.raises(SchemaError):
        load_document('{"schema_version":"999"}')
    with pytest.raises(SchemaError):
        load_document('{"kind":"x"}')


def test_format_timestamp_whole_seconds():
    ts = dt.datetime(2024, 1, 1, 6, 30, 15, tzinfo=dt.timezone.utc)
    assert format_timestamp(ts) == "2024-01-01T06:30:15Z"


def test_format_timestamp_keeps_microseconds():
    ts = dt.datetime(2024, 1, 1, 6, 30, 15, 250000, tzinfo=dt.timezone.utc)
    assert format_timestamp(ts) == "2024-01-01T06:30:15.250000Z"


def test_format_timestamp_naive_treated_as_utc():
    assert format_timestamp(dt.datetime(2024, 1, 1, 6, 0)) == "2024-01-01T06:00:00Z"


def test_parse_space_separated_form():
    ts = parse_timestamp("2024-01-01 06:30:15")
    assert ts == dt.datetime(2024, 1, 1, 6, 30, 15, tzinfo=dt.timezone.utc)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_timestamp("")
    with pytest.raises(ValueError):
        parse_timestamp("not a time")


aware_times = st.datetimes(
    min_value=dt.datetime(2000, 1, 1),
    max_value=dt.datetime(2100, 1, 1),
).map(lambda ts: ts.replace(tzinfo=dt.timezone.utc))


@given(aware_times)
def test_timestamp_round_trip(ts):
    assert parse_timestamp(format_timestamp(ts)) == ts
