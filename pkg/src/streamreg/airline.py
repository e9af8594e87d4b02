"""Feature engineering for the flight-delay case study.

Raw schedule rows carry an HHmm departure time, arrival delay in minutes,
distance in miles, and a day-of-week code with 1 = Monday. The engineered
row is: late (delay > 15 minutes), departure hour as a real in [0, 24),
distance in thousands of miles, a night flag for departures in
[20:00, 05:00) — closed at 20:00, open at 05:00 — and a weekend flag for
Saturday and Sunday. A raw time of exactly 2400 wraps to hour 0.0.

Rows that cannot be engineered come back as Skip with a reason string, so
callers can count rather than crash; the prep driver streams a whole file
this way and reports per-reason tallies.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import HeaderMismatch
from .ingest import NA_MARKERS, _open_text

__all__ = [
    "AirlineRow",
    "Skip",
    "PrepSummary",
    "OUTPUT_COLUMNS",
    "REQUIRED_COLUMNS",
    "airline_transform",
    "airline_prep",
]

OUTPUT_COLUMNS = ("late", "dep_hour", "distance_kmi", "night", "weekend")
REQUIRED_COLUMNS = ("ArrDelay", "DepTime", "Distance", "DayOfWeek")


@dataclass(frozen=True)
class AirlineRow:
    late: int
    dep_hour: float
    distance_kmi: float
    night: int
    weekend: int


@dataclass(frozen=True)
class Skip:
    reason: str


@dataclass(frozen=True)
class PrepSummary:
    n_read: int
    n_written: int
    skips: dict[str, int]


def airline_transform(
    arr_delay: str, dep_time: str, distance: str, day_of_week: str
) -> AirlineRow | Skip:
    """Engineer one raw row; Skip carries the first failing rule's reason."""
    fields = {
        "ArrDelay": arr_delay.strip(),
        "DepTime": dep_time.strip(),
        "Distance": distance.strip(),
        "DayOfWeek": day_of_week.strip(),
    }
    for name, value in fields.items():
        if value in NA_MARKERS:
            return Skip(f"missing-{name}")
    try:
        delay = float(fields["ArrDelay"])
        raw_time = int(float(fields["DepTime"]))
        miles = float(fields["Distance"])
        day = int(float(fields["DayOfWeek"]))
    except ValueError:
        return Skip("not-numeric")
    minutes = raw_time % 100
    if minutes >= 60:
        return Skip("bad-minutes")
    dep_hour = raw_time // 100 + minutes / 60.0
    if dep_hour == 24.0:
        dep_hour = 0.0
    if not 0.0 <= dep_hour < 24.0:
        return Skip("bad-hour")
    if not 1 <= day <= 7:
        return Skip("bad-day")
    if miles < 0:
        return Skip("bad-distance")
    return AirlineRow(
        late=int(delay > 15.0),
        dep_hour=dep_hour,
        distance_kmi=miles / 1000.0,
        night=int(dep_hour >= 20.0 or dep_hour < 5.0),
        weekend=int(day in (6, 7)),
    )


def airline_prep(in_path: str, out_path: str) -> PrepSummary:
    """Stream a raw schedule file into an engineered CSV, one row at a time."""
    skips: dict[str, int] = {}
    n_read = 0
    n_written = 0
    with _open_text(in_path) as fh, open(out_path, "w", encoding="utf-8", newline="") as out:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise HeaderMismatch(f"{in_path} is empty; expected a header row")
        missing = [name for name in REQUIRED_COLUMNS if name not in header]
        if missing:
            raise HeaderMismatch(f"columns {missing} not found in header of {in_path}")
        pick = [header.index(name) for name in REQUIRED_COLUMNS]
        writer = csv.writer(out)
        writer.writerow(OUTPUT_COLUMNS)
        for record in reader:
            n_read += 1
            if len(record) != len(header):
                skips["field-count"] = skips.get("field-count", 0) + 1
                continue
            row = airline_transform(*(record[i] for i in pick))
            if isinstance(row, Skip):
                skips[row.reason] = skips.get(row.reason, 0) + 1
                continue
            writer.writerow(
                [row.late, f"{row.dep_hour:.10g}", f"{row.distance_kmi:.10g}",
                 row.night, row.weekend]
            )
            n_written += 1
    return PrepSummary(n_read=n_read, n_written=n_written, skips=skips)
