"""Sweep configuration files.

Line-oriented ``key = value`` with three sections::

    [model]
    name = tfim            # heisenberg2 | tfim | classical_ising
    mode = paper           # paper | exact | self-consistent
    C = 1.0                # or J, B, T (k_B = 1); fixes an axis

    [sweep]
    K = 0, 10, 41          # min, max, steps
    C = 0, 10, 41

    [output]
    path = fig6.csv
    quantities = bound, s, validity
    plot = true

An axis fixed in ``[model]`` may not also be swept. ``#`` and ``;`` start
comments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bound_core import AverageMode
from .errors import ConversionError, ParseError

MODELS = ("heisenberg2", "tfim", "classical_ising")
QUANTITIES = ("bound", "mutual_info", "s", "validity", "sandwich")
DEFAULT_MODE = {
    "heisenberg2": AverageMode.EXACT,
    "tfim": AverageMode.PAPER_FAITHFUL,
    "classical_ising": AverageMode.EXACT,
}
SUPPORTED_MODES = {
    "heisenberg2": frozenset(AverageMode),
    "tfim": frozenset({AverageMode.PAPER_FAITHFUL}),
    "classical_ising": frozenset({AverageMode.EXACT}),
}

_KEYS = {
    "model": {"name", "mode", "K", "C", "J", "B", "T"},
    "sweep": {"K", "C"},
    "output": {"path", "quantities", "plot"},
}
CONVERSION_RTOL = 1e-9


@dataclass(frozen=True)
class AxisRange:
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("range ends must be finite")
        if self.lo > self.hi:
            raise ValueError(f"range min {self.lo} exceeds max {self.hi}")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.steps == 1 and self.lo != self.hi:
            raise ValueError("a single step needs min == max")

    def values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.lo)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.steps)]


@dataclass(frozen=True)
class SweepConfig:
    model: str
    mode: AverageMode
    k_range: AxisRange
    c_range: AxisRange
    outputs: frozenset = field(default_factory=lambda: frozenset({"bound"}))
    output_path: Path = Path("sweep.csv")
    plot: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.mode not in SUPPORTED_MODES[self.model]:
            raise ValueError(f"model {self.model} does not support mode {self.mode.value!r}")
        if self.k_range.lo < 0 or self.c_range.lo < 0:
            raise ValueError("K and C must be non-negative")
        bad = set(self.outputs) - set(QUANTITIES)
        if bad:
            raise ValueError(f"unknown output quantities {sorted(bad)}")
        for q in ("mutual_info", "sandwich"):
            if q in self.outputs and self.model != "heisenberg2":
                raise ValueError(f"{q} is only available for heisenberg2")


def _parse_float(text: str, lineno: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"value must be finite: {text!r}", lineno)
    return v


def _parse_range(text: str, lineno: int) -> AxisRange:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) == 1:
        v = _parse_float(parts[0], lineno)
        return AxisRange(v, v, 1)
    if len(parts) != 3:
        raise ParseError(f"expected 'min, max, steps', got {text!r}", lineno)
    lo, hi = _parse_float(parts[0], lineno), _parse_float(parts[1], lineno)
    try:
        steps = int(parts[2])
    except ValueError:
        raise ParseError(f"steps must be an integer, got {parts[2]!r}", lineno) from None
    try:
        return AxisRange(lo, hi, steps)
    except ValueError as e:
        raise ParseError(str(e), lineno) from None


def _parse_bool(text: str, lineno: int) -> bool:
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ParseError(f"not a boolean: {text!r}", lineno)


def _strip_comment(line: str) -> str:
    for mark in ("#", ";"):
        i = line.find(mark)
        if i >= 0:
            line = line[:i]
    return line.strip()


def _read_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip().lower()
            if name not in _KEYS:
                raise ParseError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", lineno)
            current = sections[name] = {}
            continue
        if current is None:
            raise ParseError("key outside of any section", lineno)
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (t.strip() for t in line.split("=", 1))
        section = next(n for n, d in sections.items() if d is current)
        if key not in _KEYS[section]:
            raise ParseError(f"unknown key {key!r} in [{section}]", lineno)
        if key in current:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ParseError(f"empty value for {key!r}", lineno)
        current[key] = (value, lineno)
    return sections


def _physical_axis(model_sec, dimless: str, phys: str, scale: float):
    """Value of K (or C) from [model], reconciling it with J/T (or B/T)."""
    direct = model_sec.get(dimless)
    ph = model_sec.get(phys)
    T = model_sec.get("T")
    converted = None
    if ph is not None:
        if T is None:
            raise ParseError(f"{phys} needs a temperature T", ph[1])
        t = _parse_float(T[0], T[1])
        if not t > 0:
            raise ParseError("temperature must be positive", T[1])
        converted = _parse_float(ph[0], ph[1]) * scale / t
    if direct is None:
        return converted
    value = _parse_float(direct[0], direct[1])
    if converted is not None and abs(value - converted) > CONVERSION_RTOL * max(abs(value), abs(converted)):
        raise ConversionError(
            f"{dimless} = {value!r} disagrees with {phys}/T conversion {converted!r}"
        )
    return value


def parse_config(text: str, base_dir: str | Path | None = None) -> SweepConfig:
    """Parse configuration text; relative output paths resolve against ``base_dir``."""
    sections = _read_sections(text)
    model_sec = sections.get("model", {})
    sweep_sec = sections.get("sweep", {})
    out_sec = sections.get("output", {})

    if "name" not in model_sec:
        raise ParseError("[model] needs a 'name'", None)
    name, ln = model_sec["name"]
    if name not in MODELS:
        raise ParseError(f"unknown model {name!r}", ln)
    if "mode" in model_sec:
        try:
            mode = AverageMode.parse(model_sec["mode"][0])
        except ValueError as e:
            raise ParseError(str(e), model_sec["mode"][1]) from None
        if mode not in SUPPORTED_MODES[name]:
            raise ParseError(f"model {name} does not support mode {mode.value!r}", model_sec["mode"][1])
    else:
        mode = DEFAULT_MODE[name]
    T = model_sec.get("T")
    if T is not None and "J" not in model_sec and "B" not in model_sec:
        raise ParseError("T given without J or B", T[1])

    axes = {}
    for dimless, phys, scale in (("K", "J", 0.5), ("C", "B", 1.0)):
        fixed = _physical_axis(model_sec, dimless, phys, scale)
        swept = sweep_sec.get(dimless)
        if swept is not None and fixed is not None:
            raise ParseError(f"{dimless} is both fixed in [model] and swept", swept[1])
        if swept is not None:
            axes[dimless] = _parse_range(*swept)
        elif fixed is not None:
            axes[dimless] = AxisRange(fixed, fixed, 1)
        else:
            raise ParseError(f"no value or range for {dimless}", None)

    quantities = frozenset({"bound"})
    if "quantities" in out_sec:
        text_q, ln = out_sec["quantities"]
        quantities = frozenset(q.strip() for q in text_q.split(",") if q.strip())
        bad = quantities - set(QUANTITIES)
        if bad:
            raise ParseError(f"unknown quantities {sorted(bad)}", ln)
        for q in ("mutual_info", "sandwich"):
            if q in quantities and name != "heisenberg2":
                raise ParseError(f"{q} is only available for heisenberg2", ln)
    path = Path(out_sec["path"][0]) if "path" in out_sec else Path(f"{name}_sweep.csv")
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    plot = _parse_bool(*out_sec["plot"]) if "plot" in out_sec else False

    try:
        return SweepConfig(name, mode, axes["K"], axes["C"], quantities, path, plot)
    except ValueError as e:
        raise ParseError(str(e), None) from None


def load_config(path: str | Path) -> SweepConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
