"""(K, C) grid sweeps with deterministic CSV output."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from . import heisenberg2, tfim
from .bound_core import (
    AverageMode,
    ClassicalIsingModel,
    DimensionlessCouplings,
    bogoliubov_sandwich,
    evaluate_bound,
)
from .config import SweepConfig
from .errors import CorrBoundError

CSV_HEADER = (
    "model", "mode", "K", "C", "s", "ln_z", "ln_z_mf",
    "bound", "per_spin", "mutual_info", "mf_valid", "trivial",
)
SANDWICH_HEADER = ("K", "C", "lower", "middle", "upper")
NAN = float("nan")

_MODELS = {
    "heisenberg2": heisenberg2.MODEL,
    "tfim": tfim.MODEL,
    "classical_ising": ClassicalIsingModel(),
}


@dataclass(frozen=True)
class SweepRecord:
    model: str
    mode: str
    K: float
    C: float
    s: float
    ln_z: float
    ln_z_mf: float
    bound: float
    per_spin: bool
    mutual_info: float
    mf_valid: bool
    trivial: bool


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _parse_value(name: str, text: str):
    if name in ("model", "mode"):
        return text
    if name in ("per_spin", "mf_valid", "trivial"):
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r} in column {name}")
        return text == "true"
    return float(text)


def evaluate_point(model: str, mode: AverageMode, K: float, C: float) -> SweepRecord:
    """One grid point. Computation failures become a nan row with mf_valid = false."""
    adapter = _MODELS[model]
    per_spin = adapter.normalization == "per_spin"
    try:
        p = DimensionlessCouplings(K, C)
        rep = evaluate_bound(adapter, p, mode)
        mi = heisenberg2.mutual_information(p) if model == "heisenberg2" else NAN
        return SweepRecord(
            model, mode.value, float(K), float(C), float(rep.s), rep.ln_z, rep.ln_z_mf,
            rep.bound, per_spin, float(mi), rep.mf_valid, rep.trivial,
        )
    except (CorrBoundError, ArithmeticError, ValueError):
        return SweepRecord(model, mode.value, float(K), float(C), NAN, NAN, NAN, NAN,
                           per_spin, NAN, False, False)


def _evaluate_args(args):
    return evaluate_point(*args)


def grid_points(cfg: SweepConfig) -> list[tuple[float, float]]:
    """K-major order."""
    return [(K, C) for K in cfg.k_range.values() for C in cfg.c_range.values()]


def run_points(model: str, mode: AverageMode, points, jobs: int = 1) -> list[SweepRecord]:
    args = [(model, mode, K, C) for K, C in points]
    if jobs <= 1 or len(args) < 2:
        return [_evaluate_args(a) for a in args]
    chunk = max(1, len(args) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_args, args, chunksize=chunk))


def write_csv(records, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([format_value(v) for v in astuple(r)])
    return path


def read_csv(path: str | Path) -> list[SweepRecord]:
    names = [f.name for f in fields(SweepRecord)]
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    return [SweepRecord(*(_parse_value(n, t) for n, t in zip(names, row))) for row in rows[1:]]


def sandwich_rows(records) -> list[tuple[float, ...]]:
    """(K, C, lower, middle, upper) for heisenberg2 records, at each row's s."""
    out = []
    for r in records:
        if r.model != "heisenberg2" or math.isnan(r.s):
            out.append((r.K, r.C, NAN, NAN, NAN))
            continue
        lo, mid, up = bogoliubov_sandwich(heisenberg2.MODEL, DimensionlessCouplings(r.K, r.C), r.s)
        out.append((r.K, r.C, lo, mid, up))
    return out


def write_sandwich(records, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SANDWICH_HEADER)
        for row in sandwich_rows(records):
            w.writerow([format_value(float(v)) for v in row])
    return path


def sidecar_path(cfg: SweepConfig, suffix: str) -> Path:
    p = cfg.output_path
    return p.with_name(f"{p.stem}_{suffix}")


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> tuple[list[SweepRecord], list[Path]]:
    """Evaluate the grid, write the CSV and any requested sidecars/plots."""
    from .svgplot import emit_plot

    records = run_points(cfg.model, cfg.mode, grid_points(cfg), jobs=jobs)
    written = [write_csv(records, cfg.output_path)]
    if "sandwich" in cfg.outputs:
        written.append(write_sandwich(records, sidecar_path(cfg, "sandwich.csv")))
    if cfg.plot:
        for q in sorted(cfg.outputs - {"sandwich"}):
            written.append(emit_plot(records, q, sidecar_path(cfg, f"{q}.svg")))
    return records, written
