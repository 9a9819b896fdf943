"""AIS data source resolution and day-granular file fetching.

A source is either a remote URL template with a {date} placeholder or a
local directory of day files. Fetched files land in a cache directory
(one file per source and day) via a write-to-temp-then-rename protocol,
so concurrent fetchers never expose partial files. Zip and gzip payloads
are expanded to the contained delimited file.
"""

from __future__ import annotations

import gzip
import logging
import os
import shutil
import zipfile
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from urllib.parse import urlparse

import requests

logger = logging.getLogger(__name__)


class InvalidTemplate(ValueError):
    """The url template does not carry exactly one {date} placeholder."""


class FetchFailure(RuntimeError):
    """A single day's download failed; recorded per day, never fatal to a job."""


@dataclass
class SourceConfig:
    name: str
    url_template: str
    date_from: date
    date_to: date
    time_interval: tuple[str, str] | None = None
    cache_dir: str = "cache"

    def __post_init__(self) -> None:
        self.url_template = os.fspath(self.url_template)
        if isinstance(self.date_from, str):
            self.date_from = date.fromisoformat(self.date_from)
        if isinstance(self.date_to, str):
            self.date_to = date.fromisoformat(self.date_to)
        if self.time_interval is not None:
            self.time_interval = (self.time_interval[0], self.time_interval[1])
        if self.date_from > self.date_to:
            raise ValueError("date_from must be <= date_to")

    @classmethod
    def from_doc(cls, doc: dict) -> "SourceConfig":
        known = {"name", "url_template", "date_from", "date_to", "time_interval", "cache_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown source fields: {sorted(unknown)}")
        missing = {"name", "url_template", "date_from", "date_to"} - set(doc)
        if missing:
            raise ValueError(f"missing source fields: {sorted(missing)}")
        return cls(
            name=doc["name"],
            url_template=doc["url_template"],
            date_from=doc["date_from"],
            date_to=doc["date_to"],
            time_interval=tuple(doc["time_interval"]) if doc.get("time_interval") else None,
            cache_dir=doc.get("cache_dir", "cache"),
        )

    def to_doc(self) -> dict:
        doc = {
            "name": self.name,
            "url_template": self.url_template,
            "date_from": self.date_from.isoformat(),
            "date_to": self.date_to.isoformat(),
            "cache_dir": self.cache_dir,
        }
        if self.time_interval is not None:
            doc["time_interval"] = list(self.time_interval)
        return doc


def _is_remote(template: str) -> bool:
    return urlparse(template).scheme in ("http", "https")


def resolve(cfg: SourceConfig) -> list[tuple[date, str]]:
    """One (day, url-or-path) entry per calendar day, ascending.

    Remote templates must contain exactly one {date} placeholder; a
    template without a placeholder must be a local directory, which is
    scanned for files whose name contains the ISO date.
    """
    placeholders = cfg.url_template.count("{date}")
    if _is_remote(cfg.url_template):
        if placeholders != 1:
            raise InvalidTemplate(
                f"remote template needs exactly one {{date}} placeholder, found {placeholders}"
            )
    elif placeholders > 1:
        raise InvalidTemplate(f"template has {placeholders} {{date}} placeholders")

    entries = []
    day = cfg.date_from
    while day <= cfg.date_to:
        iso = day.isoformat()
        if placeholders == 1:
            entries.append((day, cfg.url_template.format(date=iso)))
        else:
            entries.append((day, _scan_local_dir(cfg.url_template, iso)))
        day += timedelta(days=1)
    return entries


def _scan_local_dir(directory: str, iso_date: str) -> str:
    root = Path(directory)
    if root.is_file():
        return str(root)
    if root.is_dir():
        hits = sorted(p for p in root.iterdir() if p.is_file() and iso_date in p.name)
        if hits:
            return str(hits[0])
    return str(root / f"{iso_date}.csv")


def fetch(entry: tuple[date, str], cache_dir: str | Path, source_name: str) -> Path:
    """Materialize one day's file locally, reusing the cache when warm.

    Returns the path to a plain delimited file. Raises FetchFailure on
    HTTP errors, network errors, or missing local files.
    """
    day, location = entry
    cache_path = Path(cache_dir) / source_name / f"{day.isoformat()}.csv"
    if cache_path.exists() and cache_path.stat().st_size > 0:
        return cache_path
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = cache_path.with_name(f".{cache_path.name}.tmp{os.getpid()}")

    try:
        if _is_remote(location):
            _download(location, tmp_path)
        else:
            local = Path(location)
            if not local.is_file():
                raise FetchFailure(f"local file not found: {local}")
            if _compression_kind(local) is None:
                return local
            shutil.copyfile(local, tmp_path)

        kind = _compression_kind(tmp_path)
        if kind is not None:
            extracted = tmp_path.with_name(tmp_path.name + ".x")
            _expand(tmp_path, extracted, kind)
            os.replace(extracted, tmp_path)
        os.replace(tmp_path, cache_path)
        return cache_path
    finally:
        tmp_path.unlink(missing_ok=True)


def _download(url: str, dest: Path) -> None:
    try:
        with requests.get(url, stream=True, timeout=60) as response:
            if response.status_code != 200:
                raise FetchFailure(f"status {response.status_code} for {url}")
            with open(dest, "wb") as handle:
                for chunk in response.iter_content(chunk_size=1 << 16):
                    handle.write(chunk)
    except requests.RequestException as exc:
        raise FetchFailure(f"network error for {url}: {exc}") from exc


def _compression_kind(path: Path) -> str | None:
    with open(path, "rb") as handle:
        magic = handle.read(4)
    if magic[:4] == b"PK\x03\x04":
        return "zip"
    if magic[:2] == b"\x1f\x8b":
        return "gzip"
    return None


def _expand(archive: Path, dest: Path, kind: str) -> None:
    if kind == "zip":
        with zipfile.ZipFile(archive) as zf:
            members = [m for m in zf.namelist() if not m.endswith("/")]
            if not members:
                raise FetchFailure(f"empty zip archive: {archive}")
            delimited = [m for m in members if m.lower().endswith((".csv", ".txt"))]
            member = sorted(delimited or members)[0]
            with zf.open(member) as src, open(dest, "wb") as out:
                shutil.copyfileobj(src, out)
    else:
        with gzip.open(archive, "rb") as src, open(dest, "wb") as out:
            shutil.copyfileobj(src, out)
