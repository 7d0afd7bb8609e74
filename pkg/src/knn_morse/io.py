"""Reading point files and writing reproducible reports.

Reports are JSON with every float written to 17 significant digits, so a
rerun with the same inputs produces the same bytes and parsing a report
gives back exactly the numbers that were written.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .critical import CriticalPoint
from .cubical import FiltrationRecord
from .errors import KnnMorseError
from .geometry import PointCloud
from .poisson import PoissonEstimate, PoissonRunConfig, Regression
from .simplicial import AuxiliaryComplex, BettiVector

SCHEMA_VERSION = 1


class InputError(KnnMorseError, ValueError):
    """A point file could not be read or parsed."""


@dataclass
class RunManifest:
    """What produced a report. Identical manifests give identical reports."""

    subcommand: str
    inputs: tuple = ()
    k: int | None = None
    dim: int | None = None
    seed: int | None = None
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    output: str = "-"
    version: str = ""
    duration: float | None = None


def read_points_csv(path) -> PointCloud:
    """Load a headerless CSV with one point per row.

    Labels are the zero-based row numbers. ``-`` reads standard input.
    """
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror or err}") from err
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InputError(f"{path} holds no points")
    try:
        data = [[float(v) for v in row.split(",")] for row in rows]
    except ValueError as err:
        raise InputError(f"{path}: {err}") from err
    width = {len(r) for r in data}
    if len(width) != 1:
        raise InputError(f"{path}: rows have differing numbers of columns {sorted(width)}")
    try:
        return PointCloud(np.array(data, dtype=float))
    except ValueError as err:
        raise InputError(f"{path}: {err}") from err


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def write_points_csv(path, points) -> None:
    lines = [",".join(fmt_float(v) for v in row) for row in np.asarray(points, dtype=float)]
    write_text(path, "\n".join(lines) + "\n")


def write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _plain(obj):
    """Convert to JSON-ready builtins (numpy scalars and arrays included)."""
    if isinstance(obj, BettiVector):
        return list(obj.betti)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        body = (",\n").join(pad + _encode(v, indent, level + 1) for v in obj)
        return "[\n" + body + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = (",\n").join(
            pad + json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()
        )
        return "{\n" + body + "\n" + end + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text; floats carry 17 significant digits."""
    return _encode(_plain(obj), indent, 0) + "\n"


def loads(text: str):
    return json.loads(text)


def envelope(manifest: RunManifest, **payload) -> dict:
    """Top-level report object with schema version and manifest."""
    man = asdict(manifest)
    if man.get("duration") is None:
        man.pop("duration", None)
    return {"schema_version": SCHEMA_VERSION, "manifest": man, **payload}


# --- critical points -------------------------------------------------------

def critical_to_dict(cp: CriticalPoint) -> dict:
    return {
        "center": list(cp.center),
        "radius": cp.radius,
        "boundary": list(cp.boundary),
        "interior": list(cp.interior),
        "index": cp.index,
        "delta": cp.delta,
        "weights": list(cp.weights),
    }


def critical_from_dict(d: dict) -> CriticalPoint:
    return CriticalPoint(
        center=tuple(float(v) for v in d["center"]),
        radius=float(d["radius"]),
        boundary=tuple(int(v) for v in d["boundary"]),
        interior=tuple(int(v) for v in d["interior"]),
        index=int(d["index"]),
        delta=int(d["delta"]),
        weights=tuple(float(v) for v in d["weights"]),
    )


def critical_csv(crits) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = len(crits[0].center) if crits else 0
    w.writerow(["rank", "radius", "index", "delta", "n_boundary", "n_interior"]
               + [f"center_{i}" for i in range(dim)] + ["boundary", "interior", "weights"])
    for rank, cp in enumerate(crits):
        w.writerow([rank, fmt_float(cp.radius), cp.index, cp.delta, cp.n_boundary, cp.n_interior]
                   + [fmt_float(v) for v in cp.center]
                   + [" ".join(map(str, cp.boundary)), " ".join(map(str, cp.interior)),
                      " ".join(fmt_float(v) for v in cp.weights)])
    return buf.getvalue()


# --- filtration records ----------------------------------------------------

def filtration_to_dict(rec: FiltrationRecord) -> dict:
    return {
        "radius": rec.radius,
        "index": rec.index,
        "delta": rec.delta,
        "n_boundary": rec.n_boundary,
        "boundary": list(rec.boundary),
        "interior": list(rec.interior),
        "members": rec.members,
        "epsilon": rec.epsilon,
        "resolutions": list(rec.resolutions),
        "oracle": rec.oracle,
        "betti_before": list(rec.betti_before.padded(2)),
        "betti_after": list(rec.betti_after.padded(2)),
        "delta_plus": rec.delta_plus,
        "delta_minus": rec.delta_minus,
        "pass": rec.passed,
        "grid": {str(res): [list(b), list(a)] for res, (b, a) in rec.grid.items()},
        "exact": None if rec.exact is None else [list(rec.exact[0]), list(rec.exact[1])],
        "grid_agrees": rec.grid_agrees,
        "note": rec.note,
    }


def filtration_from_dict(d: dict) -> FiltrationRecord:
    return FiltrationRecord(
        radius=float(d["radius"]),
        index=int(d["index"]),
        delta=int(d["delta"]),
        n_boundary=int(d["n_boundary"]),
        boundary=tuple(d["boundary"]),
        interior=tuple(d["interior"]),
        epsilon=float(d["epsilon"]),
        resolutions=tuple(d["resolutions"]),
        oracle=d["oracle"],
        betti_before=BettiVector(tuple(d["betti_before"])),
        betti_after=BettiVector(tuple(d["betti_after"])),
        delta_plus=int(d["delta_plus"]),
        delta_minus=int(d["delta_minus"]),
        passed=bool(d["pass"]),
        members=int(d["members"]),
        grid={int(res): (tuple(v[0]), tuple(v[1])) for res, v in d["grid"].items()},
        exact=None if d["exact"] is None else (tuple(d["exact"][0]), tuple(d["exact"][1])),
        grid_agrees=d["grid_agrees"],
        note=d["note"],
    )


# --- auxiliary complex ---------------------------------------------------------

def auxiliary_to_dict(aux: AuxiliaryComplex, betti: BettiVector, matches: bool) -> dict:
    K = aux.complex
    return {
        "boundary_labels": list(aux.local),
        "active_subsets": [list(s) for s in aux.active],
        "complements": [list(c) for c in aux.complements],
        "simplices": [list(s) for q in range(K.dimension + 1) for s in K.by_dimension(q)],
        "f_vector": list(K.f_vector()),
        "betti": list(betti.betti),
        "matches_skeleton": matches,
    }


# --- Poisson estimates -----------------------------------------------------

def config_to_dict(c: PoissonRunConfig) -> dict:
    return {
        "dim": c.dim,
        "k": c.k,
        "intensities": list(c.intensities),
        "window": [list(c.window[0]), list(c.window[1])],
        "trials": c.trials,
        "seed": c.seed,
        "buffer": c.buffer,
    }


def config_from_dict(d: dict) -> PoissonRunConfig:
    return PoissonRunConfig(
        dim=int(d["dim"]), k=int(d["k"]), intensities=tuple(d["intensities"]),
        window=(tuple(d["window"][0]), tuple(d["window"][1])), trials=int(d["trials"]),
        seed=int(d["seed"]), buffer=None if d["buffer"] is None else float(d["buffer"]),
    )


def estimate_to_dict(est: PoissonEstimate) -> dict:
    vol = est.config.window_volume
    rows = []
    for a, nu in enumerate(est.nus):
        for i in range(est.means.shape[1]):
            rows.append({
                "nu": nu, "index": i,
                "mean": float(est.means[a, i]), "stderr": float(est.stderr[a, i]),
                "per_unit_intensity": float(est.means[a, i] / (nu * vol)),
            })
    reg = {str(i): None if r is None else asdict(r) for i, r in est.regression.items()}
    return {
        "config": config_to_dict(est.config),
        "buffers": [est.config.buffer_for(nu) for nu in est.nus],
        "mean_points": list(est.mean_points),
        "counts": rows,
        "regression": reg,
        "support_means": [
            {"n_boundary": key[0], "n_interior": key[1], "means": list(v)}
            for key, v in est.support_means.items()
        ],
    }


def estimate_from_dict(d: dict) -> PoissonEstimate:
    config = config_from_dict(d["config"])
    nus = config.intensities
    dim1 = config.dim + 1
    means = np.zeros((len(nus), dim1))
    stderr = np.zeros((len(nus), dim1))
    pos = {nu: a for a, nu in enumerate(nus)}
    for row in d["counts"]:
        a = pos[float(row["nu"])]
        means[a, row["index"]] = row["mean"]
        stderr[a, row["index"]] = row["stderr"]
    reg = {
        int(i): None if r is None else Regression(**{k: (math.nan if v is None else v) for k, v in r.items()})
        for i, r in d["regression"].items()
    }
    support = {(s["n_boundary"], s["n_interior"]): tuple(s["means"]) for s in d["support_means"]}
    return PoissonEstimate(config, nus, means, stderr, tuple(d["mean_points"]), reg, support)


def estimate_csv(est: PoissonEstimate) -> str:
    """Table of means followed by a regression block."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["nu", "index", "mean", "stderr"])
    for a, nu in enumerate(est.nus):
        for i in range(est.means.shape[1]):
            w.writerow([fmt_float(nu), i, fmt_float(est.means[a, i]), fmt_float(est.stderr[a, i])])
    if est.regression:
        w.writerow([])
        w.writerow(["index", "slope", "intercept", "r2", "slope_se", "intercept_se"])
        for i, r in est.regression.items():
            w.writerow([i, fmt_float(r.slope), fmt_float(r.intercept), fmt_float(r.r2),
                        fmt_float(r.slope_se), fmt_float(r.intercept_se)])
    return buf.getvalue()
