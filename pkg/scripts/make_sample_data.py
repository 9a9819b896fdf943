#!/usr/bin/env python3
"""Regenerate the bundled sample AIS dataset (deterministic, no RNG).

Three vessels over one morning in the Kattegat, 60 s reporting:

* 219000001 cargo: steady westbound transit, deceleration into the
  Aarhus port area, then moored at the berth. Three reporting gaps are
  cut out (mid-transit, during the final approach, and while mooring).
* 219000002 tanker: long straight southbound passage with one 65 min
  gap; long enough to exercise the maximum-segment-duration split.
* 219000003 fishing: slow drift, two hours of sharp zigzag tows, one
  gap, then a straight run home.

A few malformed and anomalous rows are injected on purpose so the
ingest counters have something to count.
"""

from __future__ import annotations

import math
from datetime import datetime, timedelta
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "vesselkg" / "data" / "sample_ais.csv"

DAY = datetime(2024, 1, 1)


def step(lat: float, lon: float, course_deg: float, sog_kn: float, dt_s: float = 60.0):
    dist_m = sog_kn * 1852.0 / 3600.0 * dt_s
    rad = math.radians(course_deg)
    dlat = dist_m * math.cos(rad) / 111_320.0
    dlon = dist_m * math.sin(rad) / (111_320.0 * math.cos(math.radians(lat)))
    return lat + dlat, lon + dlon


def row(
    ts: datetime,
    mmsi: int,
    lat: float,
    lon: float,
    sog: float | None,
    cog: float | None,
    heading: float | None,
    nav: str,
    ship_type: str,
    cargo: str,
    width: int,
    length: int,
    draught: float,
) -> str:
    sog_s = "" if sog is None else f"{sog:.1f}"
    cog_s = "" if cog is None else f"{cog % 360:.1f}"
    heading_s = "" if heading is None else f"{heading % 360:.0f}"
    return (
        f"{ts:%Y-%m-%d %H:%M:%S},Class A,{mmsi},{lat:.6f},{lon:.6f},{nav},,"
        f"{sog_s},{cog_s},{heading_s},{ship_type},{cargo},{width},{length},{draught}"
    )


def in_windows(minute: int, windows: list[tuple[int, int]]) -> bool:
    return any(a <= minute < b for a, b in windows)


def vessel_cargo(rows: list[str]) -> None:
    """219000001: transit -> port approach -> moored in Aarhus."""
    mmsi = 219000001
    start = DAY + timedelta(hours=6)
    lat, lon = 56.1977, 11.2070  # ~61 km east of the Aarhus port center
    course = 265.0
    gap_windows = [(60, 90), (145, 165), (185, 205)]

    for minute in range(0, 271):
        ts = start + timedelta(minutes=minute)
        if minute < 150:
            sog = 12.0
        elif minute < 175:
            sog = 12.0 - 11.2 * (minute - 150) / 25.0  # decelerate to 0.8
        elif minute < 185:
            sog = 0.8 - 0.05 * (minute - 175)  # creep to the berth
        else:
            sog = 0.1
        moored = minute >= 185
        if not in_windows(minute, gap_windows):
            rows.append(
                row(
                    ts,
                    mmsi,
                    lat,
                    lon,
                    0.1 if moored else sog,
                    None if moored else course,
                    511 if moored else course + 2,
                    "Moored" if moored else "Under way using engine",
                    "Cargo",
                    "Category X",
                    28,
                    180,
                    8.5,
                )
            )
        if not moored:
            lat, lon = step(lat, lon, course, sog)


def vessel_tanker(rows: list[str]) -> None:
    """219000002: departs Skagen, 13 h straight southbound run, one 65 min gap."""
    mmsi = 219000002
    start = DAY + timedelta(hours=5, minutes=30)
    lat, lon = 57.7165, 10.5930  # inside the Skagen port radius
    course = 168.0
    gap_windows = [(210, 275)]

    for minute in range(0, 781):
        ts = start + timedelta(minutes=minute)
        sog = 1.5 + (10.2 - 1.5) * min(minute, 15) / 15.0
        if not in_windows(minute, gap_windows):
            rows.append(
                row(
                    ts,
                    mmsi,
                    lat,
                    lon,
                    sog,
                    course,
                    course - 1,
                    "Under way using engine",
                    "Tanker",
                    "Category Y",
                    32,
                    220,
                    11.2,
                )
            )
        lat, lon = step(lat, lon, course, sog)


def vessel_fishing(rows: list[str]) -> None:
    """219000003: drift, zigzag tows, one gap, straight run home."""
    mmsi = 219000003
    start = DAY + timedelta(hours=7)
    lat, lon = 56.6200, 11.5200
    gap_windows = [(45, 65), (165, 185)]

    for minute in range(0, 301):
        ts = start + timedelta(minutes=minute)
        if minute < 45:
            sog = 1.2 + 0.3 * math.sin(minute / 9.0)
            course = 95.0 + 6.0 * math.sin(minute / 11.0)
            nav = "Engaged in fishing"
        elif minute < 165:
            tow = (minute - 45) // 15
            sog = 4.5
            course = 60.0 if tow % 2 == 0 else 120.0
            nav = "Engaged in fishing"
        else:
            sog = 8.5
            course = 300.0
            nav = "Under way using engine"
        if not in_windows(minute, gap_windows):
            rows.append(
                row(
                    ts,
                    mmsi,
                    lat,
                    lon,
                    sog,
                    course,
                    course,
                    nav,
                    "Fishing",
                    "",
                    9,
                    24,
                    3.1,
                )
            )
        lat, lon = step(lat, lon, course, sog)


def inject_anomalies(rows: list[str]) -> None:
    # Unparseable vessel id and latitude: rejected at parse time.
    rows.append(f"{DAY:%Y-%m-%d} 06:10:00,Class A,BADMMSI,56.100000,11.000000,Under way using engine,,10.0,200.0,200,Cargo,,28,180,8.5")
    rows.append(f"{DAY:%Y-%m-%d} 06:11:00,Class A,219000001,91.500000,11.000000,Under way using engine,,10.0,200.0,200,Cargo,,28,180,8.5")
    # Duplicate timestamp for the cargo vessel: first occurrence survives.
    rows.append(f"{DAY:%Y-%m-%d} 06:20:00,Class A,219000001,56.190000,11.150000,Under way using engine,,12.0,265.0,267,Cargo,Category X,28,180,8.5")
    # Teleport between two tanker reports: implied speed is absurd.
    rows.append(f"{DAY:%Y-%m-%d} 06:15:30,Class A,219000002,59.750000,10.700000,Under way using engine,,10.2,168.0,167,Tanker,Category Y,32,220,11.2")


def main() -> None:
    rows: list[str] = []
    vessel_cargo(rows)
    vessel_tanker(rows)
    vessel_fishing(rows)
    inject_anomalies(rows)
    rows.sort(key=lambda line: (line.split(",", 1)[0], line.split(",")[2]))

    header = (
        "# Timestamp,Type of mobile,MMSI,Latitude,Longitude,Navigational status,ROT,"
        "SOG,COG,Heading,Ship type,Cargo type,Width,Length,Draught"
    )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
