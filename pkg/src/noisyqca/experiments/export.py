"""Writing run results: CSV series, JSON metadata sidecar and a plot script."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .harness import CLASSICAL_FIDELITY, RunResult

CSV_COLUMNS = ("t", "observable", "mean", "stderr")


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_.=," else "_" for c in name).strip("_") or "run"


def csv_text(result: RunResult) -> str:
    """CSV body; floats are written with ``repr`` so they parse back bit-exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name in result.observables:
        mean, err = result.mean(name), result.stderr(name)
        for t in result.t:
            if math.isnan(mean[t]):
                continue
            writer.writerow([int(t), name, repr(float(mean[t])), repr(float(err[t]))])
    return buf.getvalue()


def read_csv(path) -> dict:
    """Parse an exported CSV into ``{observable: (t, mean, stderr)}`` arrays."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            rows.setdefault(row["observable"], []).append((int(row["t"]), float(row["mean"]), float(row["stderr"])))
    return {k: tuple(np.array(col) for col in zip(*v)) for k, v in rows.items()}


_PLOT_TEMPLATE = '''"""Plot the average transfer fidelity of run {name!r}."""

import csv

import matplotlib.pyplot as plt

CLASSICAL_FIDELITY = {threshold!r}  # best fidelity reachable by measure-and-prepare
CSV_PATH = {csv_path!r}

t, mean, err = [], [], []
with open(CSV_PATH, newline="") as fh:
    for row in csv.DictReader(fh):
        if row["observable"] == "fidelity":
            t.append(int(row["t"]))
            mean.append(float(row["mean"]))
            err.append(float(row["stderr"]))

fig, ax = plt.subplots()
ax.errorbar(t, mean, yerr=err, marker="o", ms=3, lw=1)
ax.axhline(CLASSICAL_FIDELITY, color="k", ls="--", lw=1, label="classical limit 2/3")
ax.set_xlabel("t")
ax.set_ylabel("<F(t)>")
ax.set_ylim(0, 1.05)
ax.set_title({name!r})
ax.legend()
fig.savefig({png_path!r}, dpi=150, bbox_inches="tight")
'''


def plot_script(result: RunResult, csv_path: str) -> str:
    stem = str(Path(csv_path).with_suffix(""))
    return _PLOT_TEMPLATE.format(
        name=result.config.name,
        threshold=CLASSICAL_FIDELITY,
        csv_path=str(csv_path),
        png_path=stem + ".png",
    )


def export(result: RunResult, path, format: str = "csv", plot: bool = False) -> dict:
    """Write ``result`` under directory ``path``; returns the written file paths.

    ``format="csv"`` writes ``<name>.csv`` plus a ``<name>.meta.json`` sidecar
    (config, seed, constraint report, SHA-256 of the CSV).  ``format="json"``
    writes a single structured document holding metadata and every series.
    """
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _safe_name(result.config.name)
    written = {}
    meta = dict(result.metadata)

    if format == "csv":
        text = csv_text(result)
        csv_path = out_dir / f"{stem}.csv"
        csv_path.write_text(text)
        meta["csv_file"] = csv_path.name
        meta["csv_sha256"] = hashlib.sha256(text.encode()).hexdigest()
        meta_path = out_dir / f"{stem}.meta.json"
        meta_path.write_text(json.dumps(meta, indent=2, default=_jsonable))
        written = {"csv": csv_path, "metadata": meta_path}
        if plot:
            script = out_dir / f"{stem}_plot.py"
            script.write_text(plot_script(result, csv_path.name))
            written["plot"] = script
    elif format == "json":
        doc = {
            "metadata": meta,
            "t": result.t.tolist(),
            "series": {
                name: {"mean": _nan_to_none(result.mean(name)), "stderr": _nan_to_none(result.stderr(name))}
                for name in result.observables
            },
        }
        json_path = out_dir / f"{stem}.json"
        json_path.write_text(json.dumps(doc, indent=2, default=_jsonable))
        written = {"json": json_path}
    else:
        raise ValueError(f"unknown export format {format!r}")
    return written


def _nan_to_none(arr) -> list:
    return [None if math.isnan(v) else float(v) for v in arr]


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
