"""Command line front end: ``simulate``, ``check``, ``reduce`` and ``spectrum``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checks import SELECTORS, corrupted_basis, run_suite
from .harness import REDUCE_TOL, ConfigError, load_config, make_basis, run_experiment
from .spectral import SnapshotFormatError, build_basis, mode_energies, parse_snapshot

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


def _mode_pair(text: str) -> tuple[int, int]:
    try:
        m, k = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected m,k got {text!r}") from exc
    return m, k


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="discflow", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="run the Euler flow described by a config")
    p.add_argument("config")
    p = sub.add_parser("check", help="run an invariant suite")
    p.add_argument("selector", choices=SELECTORS)
    p.add_argument("--config", help="take the basis resolution from this config")
    p.add_argument("--corrupt-zero", type=_mode_pair, metavar="M,K",
                   help="perturb one Bessel zero (negative control)")
    p.add_argument("--json", action="store_true", help="print the machine-readable report")
    p = sub.add_parser("reduce", help="run quotient-mode and chart-mode reduced flows and compare")
    p.add_argument("config")
    p = sub.add_parser("spectrum", help="print per-mode energies of a snapshot")
    p.add_argument("snapshot")
    return ap


def _simulate(args) -> int:
    cfg = load_config(args.config)
    man = run_experiment(cfg)
    print(f"status={man.status} dir={cfg.directory}")
    if man.message:
        print(man.message)
    return {"ok": EXIT_OK, "blowup": EXIT_BLOWUP}.get(man.status, EXIT_INVARIANT)


def _check(args) -> int:
    if args.config:
        basis = make_basis(load_config(args.config))
    else:
        basis = build_basis(8, 8)
    if args.corrupt_zero:
        m, k = args.corrupt_zero
        if not (0 <= m <= basis.M_max and 1 <= k <= basis.K_max):
            raise ConfigError([f"--corrupt-zero: mode ({m},{k}) outside the basis"])
        basis = corrupted_basis(basis, m, k)
    report = run_suite(args.selector, basis, acceptance=args.corrupt_zero is None)
    if args.json:
        print(report.to_json())
    else:
        for r in report.results:
            print(r.line())
        print(f"{'PASS' if report.passed else 'FAIL'} {args.selector}: "
              f"{len(report.failures())} failing of {len(report.results)}")
    return EXIT_OK if report.passed else EXIT_INVARIANT


def _reduce(args) -> int:
    cfg = load_config(args.config)
    cfg.reduce = True
    man = run_experiment(cfg)
    red = man.reduction or {}
    disc = red.get("discrepancy")
    print(f"status={man.status} subgroup={red.get('subgroup')} discrepancy="
          f"{'n/a' if disc is None else f'{disc:.3e}'} tol={REDUCE_TOL:.0e}")
    if man.status == "blowup":
        return EXIT_BLOWUP
    if man.status != "ok" or (disc is not None and disc >= REDUCE_TOL):
        return EXIT_INVARIANT
    return EXIT_OK


def _spectrum(args) -> int:
    try:
        u, _ = parse_snapshot(Path(args.snapshot).read_text())
    except OSError as exc:
        raise ConfigError([f"snapshot: {exc}"]) from exc
    basis = build_basis(u.M_max, u.K_max)
    e = mode_energies(basis, u)
    print("m k energy")
    for m in range(e.shape[0]):
        for k in range(e.shape[1]):
            print(f"{m} {k + 1} {float(e[m, k])!r}")
    print(f"# total {float(np.sum(e))!r}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"simulate": _simulate, "check": _check, "reduce": _reduce, "spectrum": _spectrum}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SnapshotFormatError as exc:
        print(f"bad snapshot: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
