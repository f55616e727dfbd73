"""Metric records and their delimited/JSON-lines serializations."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

METRIC_NAMES = ("test_mse", "relative_mse", "bias2", "variance",
                "excess_risk", "r2_surrogate")

#: replicate id used for cross-replicate summary rows (bias2 / variance)
SUMMARY_REPLICATE = -1


@dataclass(frozen=True)
class MetricsRecord:
    experiment: str
    replicate: int
    estimator: str
    metric: str
    value: float

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value for metric {self.metric!r}")

    def key(self):
        return (self.experiment, self.replicate, self.estimator, self.metric)


def sort_records(records) -> list[MetricsRecord]:
    return sorted(records, key=lambda r: r.key())


def check_unique(records) -> None:
    seen = set()
    for r in records:
        if r.key() in seen:
            raise ValueError(f"duplicate record key {r.key()}")
        seen.add(r.key())


def write_records_csv(path, records) -> None:
    records = sort_records(records)
    check_unique(records)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "replicate", "estimator", "metric", "value"])
        for r in records:
            w.writerow([r.experiment, r.replicate, r.estimator, r.metric, repr(r.value)])


def read_records_csv(path) -> list[MetricsRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(MetricsRecord(row["experiment"], int(row["replicate"]),
                                     row["estimator"], row["metric"],
                                     float(row["value"])))
    return out


def write_records_jsonl(path, records) -> None:
    with open(path, "w") as fh:
        for r in sort_records(records):
            fh.write(json.dumps({"experiment": r.experiment, "replicate": r.replicate,
                                 "estimator": r.estimator, "metric": r.metric,
                                 "value": r.value}) + "\n")


def aggregate(records) -> list[dict]:
    """Mean/median/SE per (experiment, estimator, metric) over replicates.

    Summary rows (replicate == SUMMARY_REPLICATE) pass through as single
    observations with zero SE.
    """
    groups: dict[tuple, list[float]] = {}
    for r in sort_records(records):
        groups.setdefault((r.experiment, r.estimator, r.metric), []).append(r.value)
    out = []
    for (exp, est, metric), values in sorted(groups.items()):
        arr = np.asarray(values)
        se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        out.append({"experiment": exp, "estimator": est, "metric": metric,
                    "mean": float(arr.mean()), "median": float(np.median(arr)),
                    "se": se, "n": int(arr.size)})
    return out


def write_aggregate_csv(path, records) -> None:
    rows = aggregate(records)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "estimator", "metric", "mean", "median", "se", "n"])
        for row in rows:
            w.writerow([row["experiment"], row["estimator"], row["metric"],
                        repr(row["mean"]), repr(row["median"]), repr(row["se"]),
                        row["n"]])
