"""Run reports: deterministic JSON documents embedding the run config,
seed(s), dataset checksums, kernel backend, and code version, plus CSV
helpers for grids. Reports contain no timestamps; replaying a report's
config must reproduce its exact-mode metrics bit-for-bit.
"""

import csv
import hashlib
import json

import debiaslab
from debiaslab.kernels import BACKEND


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def make_report(kind: str, *, config: dict, metrics: dict, seed=None,
                layer_range: str | None = None, datasets: dict | None = None,
                n: int | None = None, extra: dict | None = None) -> dict:
    report = {
        "kind": kind,
        "code_version": debiaslab.__version__,
        "kernel_backend": BACKEND,
        "config": config,
        "seed": seed,
        "layer_range": layer_range,
        "n": n,
        "dataset_checksums": {name: file_sha256(p) for name, p in (datasets or {}).items()},
        "metrics": metrics,
    }
    if extra:
        report.update(extra)
    return report


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path, fieldnames, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
