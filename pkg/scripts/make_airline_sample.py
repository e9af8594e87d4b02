"""Regenerate tests/data/airline_sample.csv.gz.

Synthetic flight records in the classic on-time-performance column layout,
10,000 rows, fixed seed. The response pattern is planted so that a logistic
fit of late ~ dep_hour + distance_kmi + night + weekend converges quickly:
late flights are more likely at night and on long routes. A sprinkle of NA
fields and a few impossible clock values exercise the skip paths.
"""

from __future__ import annotations

import csv
import gzip
import pathlib

import numpy as np

HEADER = [
    "Year",
    "Month",
    "DayofMonth",
    "DayOfWeek",
    "DepTime",
    "CRSDepTime",
    "ArrDelay",
    "DepDelay",
    "Origin",
    "Dest",
    "Distance",
    "Cancelled",
    "Diverted",
]

AIRPORTS = ["BOS", "JFK", "ORD", "DEN", "SEA", "LAX", "ATL", "DFW", "PHX", "MSP"]

N_ROWS = 10_000
SEED = 20080101


def main() -> None:
    rng = np.random.Generator(np.random.Philox(SEED))
    out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "airline_sample.csv.gz"

    with gzip.open(path, "wt", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for i in range(N_ROWS):
            month = int(rng.integers(1, 13))
            day = int(rng.integers(1, 29))
            dow = int(rng.integers(1, 8))
            hour = int(rng.choice(24, p=_hour_weights()))
            minute = int(rng.integers(0, 60))
            dep_hhmm = hour * 100 + minute
            sched = max(0, dep_hhmm - int(rng.integers(0, 20)))
            dist = int(rng.integers(100, 2800))

            night = 1.0 if (hour >= 20 or hour < 5) else 0.0
            weekend = 1.0 if dow in (6, 7) else 0.0
            eta = -2.0 + 0.06 * hour + 0.45 * (dist / 1000.0) + 0.9 * night - 0.3 * weekend
            p_late = 1.0 / (1.0 + np.exp(-eta))
            if rng.uniform() < p_late:
                delay = int(rng.integers(16, 180))
            else:
                delay = int(rng.integers(-20, 16))

            dep_field = str(dep_hhmm)
            arr_field = str(delay)
            # a handful of exact-midnight codes, NA holes, and broken minutes
            if i % 2500 == 1234:
                dep_field = "2400"
            if rng.uniform() < 0.012:
                dep_field = "NA"
            if rng.uniform() < 0.02:
                arr_field = "NA"
            if i in (77, 4004, 9001):
                dep_field = str(hour * 100 + 75)

            writer.writerow(
                [
                    2008,
                    month,
                    day,
                    dow,
                    dep_field,
                    sched,
                    arr_field,
                    max(0, delay - int(rng.integers(0, 10))),
                    AIRPORTS[int(rng.integers(0, len(AIRPORTS)))],
                    AIRPORTS[int(rng.integers(0, len(AIRPORTS)))],
                    dist,
                    0,
                    0,
                ]
            )
    print(f"wrote {path} ({N_ROWS} rows, seed {SEED})")


def _hour_weights() -> np.ndarray:
    # traffic peaks in the morning and early evening, thin overnight
    w = np.ones(24)
    w[6:10] = 3.0
    w[16:20] = 3.0
    w[0:5] = 0.3
    return w / w.sum()


if __name__ == "__main__":
    main()
