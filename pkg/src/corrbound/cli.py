"""Command-line entry point.

Exit codes: 0 success, 1 computation error, 2 usage error (bad flags,
unreadable or invalid config, out-of-domain parameters).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, ed_oracle, heisenberg2, qc_map, tfim
from .bound_core import (
    AverageMode,
    ClassicalIsingModel,
    DimensionlessCouplings,
    correlation_bound,
)
from .config import DEFAULT_MODE, SUPPORTED_MODES, load_config
from .errors import ConversionError, CorrBoundError, ParseError
from .sweep import format_value, run_sweep

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _couplings(args) -> DimensionlessCouplings:
    try:
        return DimensionlessCouplings(args.K, args.C)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _line(key, value):
    print(f"{key} = {format_value(value) if isinstance(value, (bool, float)) else value}")


def cmd_bound_sweep(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ParseError, ConversionError) as e:
        raise UsageError(f"{args.config}: {e}") from None
    except OSError as e:
        raise UsageError(f"cannot read {args.config}: {e.strerror}") from None
    if args.output:
        from dataclasses import replace
        from pathlib import Path
        cfg = replace(cfg, output_path=Path(args.output))
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    records, written = run_sweep(cfg, jobs=args.jobs)
    n_bad = sum(not r.mf_valid for r in records)
    _line("rows", len(records))
    _line("invalid_rows", n_bad)
    for path in written:
        _line("wrote", str(path))
    return EXIT_OK


_MF_MODELS = {
    "heisenberg2": heisenberg2.MODEL,
    "tfim": tfim.MODEL,
    "classical_ising": ClassicalIsingModel(),
}


def cmd_mf_solve(args) -> int:
    p = _couplings(args)
    mode = DEFAULT_MODE[args.model]
    if args.mode:
        try:
            mode = AverageMode.parse(args.mode)
        except ValueError as e:
            raise UsageError(str(e)) from None
    if mode not in SUPPORTED_MODES[args.model]:
        raise UsageError(f"model {args.model} does not support mode {mode.value!r}")
    model = _MF_MODELS[args.model]
    sol = model.mean_field(p, mode)
    rep = correlation_bound(model, p, sol.principal, mode, solution=sol)
    _line("model", args.model)
    _line("mode", mode.value)
    _line("branches", ", ".join(repr(float(b)) for b in sol.branches) or "none")
    _line("s", float(sol.principal))
    _line("mf_valid", rep.mf_valid)
    _line("bound", rep.bound)
    _line("per_spin_bound", rep.per_spin)
    _line("trivial", rep.trivial)
    return EXIT_OK


def cmd_ed_check(args) -> int:
    p = _couplings(args)
    try:
        spec = ed_oracle.ChainSpec(args.n, args.model, args.boundary or
                                   ("periodic" if args.n >= 3 else "open"), p)
    except ValueError as e:
        raise UsageError(str(e)) from None
    res = ed_oracle.ed_check(spec)
    for key in ("n_sites", "model", "boundary", "s", "identity_residual", "mutual_info", "bound"):
        _line(key, res[key])
    return EXIT_OK


def _n_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty N list")
    return out


def cmd_qcmap_check(args) -> int:
    try:
        H = qc_map.QubitHamiltonian(args.E, args.delta)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if not args.beta > 0:
        raise UsageError("--beta must be positive")
    zq = qc_map.quantum_partition(H, args.beta)
    _line("quantum_Z", zq)
    print("N,classical_Z,error,error_times_N")
    prev = None
    ratios = []
    for N in args.n_list:
        c = qc_map.coefficients(H, args.beta, N)
        zc = qc_map.classical_partition(c)
        err = abs(zc - zq)
        print(f"{N},{format_value(zc)},{format_value(err)},{format_value(err * N)}")
        if prev is not None and err > 0:
            ratios.append((prev[0], N, prev[1] / err))
        prev = (N, err)
    for a, b, r in ratios:
        _line(f"error_ratio_{a}_{b}", r)
    return EXIT_OK


def cmd_critical_k(args) -> int:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    kc = tfim.critical_K_at_zero_field(tol=args.tol)
    _line("K_c", kc)
    _line("tolerance", float(args.tol))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="corrbound",
        description="Relative-entropy bounds on thermal correlations from mean-field theory.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bound-sweep", help="sweep a (K, C) grid from a config file")
    sp.add_argument("config")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes (output is identical)")
    sp.add_argument("--output", help="override the CSV path from the config")
    sp.set_defaults(func=cmd_bound_sweep)

    sp = sub.add_parser("mf-solve", help="solve the mean field and print the bound")
    sp.add_argument("--model", required=True, choices=sorted(_MF_MODELS))
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--mode", help="paper | exact | self-consistent")
    sp.set_defaults(func=cmd_mf_solve)

    sp = sub.add_parser("ed-check", help="exact-diagonalization check of the bound identity")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--model", choices=("tfim", "heisenberg"), default="tfim")
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--boundary", choices=("open", "periodic"))
    sp.set_defaults(func=cmd_ed_check)

    sp = sub.add_parser("qcmap-check", help="Trotter error of the qubit -> Ising chain map")
    sp.add_argument("--E", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--n-list", type=_n_list, default=[50, 100, 200])
    sp.set_defaults(func=cmd_qcmap_check)

    sp = sub.add_parser("critical-k", help="zero-field TFIM mean-field threshold K_c")
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.set_defaults(func=cmd_critical_k)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"corrbound: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CorrBoundError, ArithmeticError, ValueError) as e:
        print(f"corrbound: computation failed: {e}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
