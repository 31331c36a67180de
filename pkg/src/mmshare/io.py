"""CSV / JSON export of drop results and coverage curves.

Files written for ``export(..., out_dir, "csv")``::

    raw.csv                       drop,sinr_db,rate_bps,load,state
    <metric>_coverage.csv         threshold,coverage   (one file per curve;
                                  a curve label is appended when present)

``export(..., out_dir, "json")`` writes a single ``results.json``::

    {"format": "mmshare-results", "version": 1, "seed": int,
     "config": {key: value, ...},
     "curves": [{"metric", "label", "sample_count", "thresholds", "coverage"}],
     "drops": [{"drop", "sinr_db", "rate_bps", "load", "state"}]}

Outage SINR is written as the string ``"-inf"`` in both formats. Floats use
``repr`` so output is byte-stable for a fixed seed.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .config import SimulationConfig, config_as_dict
from .engine import DropResult
from .metrics import CoverageCurve
from .mimo import gain_pattern
from .propagation import LinkState

RAW_HEADER = "drop,sinr_db,rate_bps,load,state"
JSON_FORMAT = "mmshare-results"
JSON_VERSION = 1


def _num(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return repr(x)


def _json_num(x: float):
    x = float(x)
    return _num(x) if math.isinf(x) else x


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_")


def curve_filename(curve: CoverageCurve) -> str:
    base = f"{curve.metric}_coverage"
    return f"{base}_{_slug(curve.label)}.csv" if curve.label else f"{base}.csv"


def raw_csv_text(results: list[DropResult]) -> str:
    lines = [RAW_HEADER]
    for r in results:
        lines.append(f"{r.drop},{_num(r.sinr_db)},{_num(r.rate_bps)},{r.load},{r.state.name}")
    return "\n".join(lines) + "\n"


def curve_csv_text(curve: CoverageCurve) -> str:
    lines = ["threshold,coverage"]
    lines += [f"{_num(t)},{_num(c)}" for t, c in zip(curve.thresholds, curve.coverage)]
    return "\n".join(lines) + "\n"


def results_json_text(results: list[DropResult], curves: list[CoverageCurve],
                      config: SimulationConfig | None) -> str:
    doc = {
        "format": JSON_FORMAT,
        "version": JSON_VERSION,
        "seed": config.rng_seed if config is not None else None,
        "config": config_as_dict(config) if config is not None else None,
        "curves": [
            {
                "metric": c.metric,
                "label": c.label,
                "sample_count": c.sample_count,
                "thresholds": [float(t) for t in c.thresholds],
                "coverage": [float(v) for v in c.coverage],
            }
            for c in curves
        ],
        "drops": [
            {"drop": r.drop, "sinr_db": _json_num(r.sinr_db), "rate_bps": float(r.rate_bps),
             "load": r.load, "state": r.state.name}
            for r in results
        ],
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _write_all(files: dict[Path, str]) -> None:
    """Write every file or none: stage to temporaries, then rename."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def export(results: list[DropResult], curves: list[CoverageCurve], out_dir, fmt: str = "csv",
           config: SimulationConfig | None = None) -> list[Path]:
    """Write results and curves under ``out_dir``; return the written paths."""
    if not results:
        raise ValueError("nothing to export: empty result list")
    out = Path(out_dir)
    if fmt == "csv":
        files = {out / "raw.csv": raw_csv_text(results)}
        for c in curves:
            files[out / curve_filename(c)] = curve_csv_text(c)
    elif fmt == "json":
        files = {out / "results.json": results_json_text(results, curves, config)}
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    _write_all(files)
    return list(files)


# ------------------------------------------------------------------ readers

def read_raw_csv(path) -> list[DropResult]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != RAW_HEADER:
        raise ValueError(f"{path}: not a raw results file")
    out = []
    for line in lines[1:]:
        d, s, r, n, st = line.split(",")
        out.append(DropResult(int(d), float(s), float(r), int(n), LinkState[st]))
    return out


def read_curve_csv(path, metric: str = "sinr", label: str = "") -> CoverageCurve:
    rows = Path(path).read_text(encoding="utf-8").splitlines()[1:]
    arr = np.array([[float(x) for x in row.split(",")] for row in rows]).reshape(-1, 2)
    return CoverageCurve(arr[:, 0], arr[:, 1], sample_count=0, metric=metric, label=label)


def load_results_json(path) -> tuple[dict, list[DropResult], list[CoverageCurve]]:
    """Parse ``results.json``; returns (header with seed/config, drops, curves)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != JSON_FORMAT or doc.get("version") != JSON_VERSION:
        raise ValueError(f"{path}: unsupported results document")
    drops = [DropResult(int(d["drop"]), float(d["sinr_db"]), float(d["rate_bps"]), int(d["load"]),
                        LinkState[d["state"]]) for d in doc["drops"]]
    curves = [CoverageCurve(np.array(c["thresholds"], dtype=float), np.array(c["coverage"], dtype=float),
                            int(c["sample_count"]), c["metric"], c["label"]) for c in doc["curves"]]
    header = {"seed": doc["seed"], "config": doc["config"]}
    return header, drops, curves


def write_gain_pattern_csv(path, tx_dims=(8, 8), rx_dims=(4, 4), n_points: int = 721) -> Path:
    """Aggregate TX+RX gain versus azimuth (``angle_deg,gain_db``)."""
    az = np.linspace(-180.0, 180.0, n_points)
    g = gain_pattern(tx_dims, rx_dims, np.deg2rad(az))
    lines = ["angle_deg,gain_db"] + [f"{_num(a)},{_num(x)}" for a, x in zip(az, g)]
    path = Path(path)
    _write_all({path: "\n".join(lines) + "\n"})
    return path
