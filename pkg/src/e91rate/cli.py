"""Command-line interface.

Subcommands::

    keyrate   key rates of a Werner state for the CHSH bases and a basis search
    map       strategy region map over (eta, F) as CSV
    kopt      optimal number of distillation rounds
    distill   distillation trajectory as CSV

Exit status: 0 on success (no-key outcomes included), 2 for usage or domain
errors, 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Sequence

from .distillation import ProtocolKind, cumulative_ent_rates, trajectory
from .errors import DomainError
from .keyrate import basis_grid_oracle, key_rate, optimal_rate_werner
from .kopt import DEFAULT_K_MAX, EtaMode, exhaustive_k_opt, find_k_opt
from .quantum import bloch_basis, conjugate_basis, werner_from_fidelity
from .strategy import CHSH_BASES, StrategyKind, fmt, region_map

EXIT_USAGE = 2
EXIT_IO = 3


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _check_fidelity(F: float, name: str = "fidelity") -> None:
    if not 0.25 <= F <= 1:
        raise DomainError(f"{name} must lie in [0.25, 1], got {F}")


def _check_eta(eta: float, name: str = "eta") -> None:
    if not 0 < eta < 0.25:
        raise DomainError(f"{name} must lie in (0, 0.25), got {eta}")


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError(f"cannot write {out}: {exc.strerror}", EXIT_IO) from exc


def cmd_keyrate(args: argparse.Namespace) -> int:
    _check_fidelity(args.fidelity)
    if args.grid_steps < 8:
        raise DomainError("--grid-steps must be at least 8")
    F = args.fidelity
    rho = werner_from_fidelity(F)
    lines = [f"F={fmt(F)}", f"r_key_opt={fmt(optimal_rate_werner(F))}"]
    oracle = basis_grid_oracle(rho, args.grid_steps)
    lines.append(f"r_key_oracle={fmt(oracle.rate)} grid_steps={args.grid_steps}")
    if args.basis is not None:
        bA = bloch_basis(*args.basis)
        lines.append(
            f"r_key[theta={fmt(args.basis[0])},phi={fmt(args.basis[1])};conjugate]="
            f"{fmt(key_rate(rho, bA, conjugate_basis(bA)))}"
        )
    for na, ba in CHSH_BASES.items():
        for nb, bb in CHSH_BASES.items():
            lines.append(f"r_key[{na},{nb}]={fmt(key_rate(rho, ba, bb))}")
    _write("\n".join(lines) + "\n", None)
    return 0


def cmd_map(args: argparse.Namespace) -> int:
    lo, hi = args.eta_range
    _check_eta(lo, "eta range start")
    _check_eta(hi, "eta range end")
    for F in args.f_range:
        _check_fidelity(F, "F range bound")
    if args.steps < 1:
        raise DomainError("--steps must be positive")
    m = region_map(args.eta_range, args.f_range, args.steps)
    _write(m.to_csv(), args.out)
    return 0


def cmd_kopt(args: argparse.Namespace) -> int:
    _check_fidelity(args.f0, "--f0")
    _check_eta(args.eta, "--eta")
    if args.k_max < 1:
        raise DomainError("--k-max must be at least 1")
    protocol = ProtocolKind.parse(args.protocol, args.twirl)
    strategy = StrategyKind.parse(args.strategy)
    mode = EtaMode.fixed(args.eta) if args.eta_mode == "fixed" else EtaMode.scaled(args.eta)

    res = find_k_opt(args.f0, protocol, strategy, mode, args.k_max)
    lines = [
        "k_loc,kappa1,kappa2,kappa,k_opt,rate",
        res.summary_line(),
        f"k_opt={res.k_opt}",
        f"rate={fmt(res.rate)}",
        f"no_key={str(res.no_key).lower()}",
        f"saturated={str(res.saturated).lower()}",
    ]
    if args.verify:
        k_star, _ = exhaustive_k_opt(args.f0, protocol, strategy, mode, args.k_max)
        lines.append(f"verify_k_opt={k_star}")
        lines.append(f"verified={str(k_star == res.k_opt).lower()}")
    summary = "\n".join(lines) + "\n"
    if args.out is None:
        _write(summary + "\n" + res.curve_csv(), None)
    else:
        _write(res.curve_csv(), args.out)
        _write(summary, None)
    return 0


def cmd_distill(args: argparse.Namespace) -> int:
    _check_fidelity(args.f0, "--f0")
    protocol = ProtocolKind.parse(args.protocol, args.twirl)
    t = trajectory(args.f0, args.k, protocol)
    r_ent = cumulative_ent_rates(t)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "F", "p_ent", "r_ent_cumulative"])
    probs = (1.0, *t.success_probabilities)
    for d, state in enumerate(t.states):
        w.writerow([d, fmt(state.F), fmt(probs[d]), fmt(r_ent[d])])
    _write(buf.getvalue(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="e91rate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keyrate", help="key rates of a Werner state")
    p.add_argument("--fidelity", type=float, required=True)
    p.add_argument("--grid-steps", type=int, default=24, help="basis search grid per angle (default 24)")
    p.add_argument("--basis", type=float, nargs=2, metavar=("THETA", "PHI"),
                   help="also report Alice in bloch_basis(THETA, PHI), Bob in its conjugate")
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("map", help="asymmetric vs symmetric region map (CSV)")
    p.add_argument("--eta-range", type=float, nargs=2, default=(0.005, 0.12), metavar=("LO", "HI"))
    p.add_argument("--f-range", type=float, nargs=2, default=(0.75, 1.0), metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=200, help="grid points per axis (default 200)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("kopt", help="optimal number of distillation rounds")
    p.add_argument("--f0", type=float, required=True, help="initial Werner fidelity")
    p.add_argument("--eta", type=float, required=True, help="CHSH probability eta (eta0 when scaled)")
    p.add_argument("--protocol", choices=["bbpssw", "dejmps"], required=True)
    p.add_argument("--strategy", choices=["asym", "sym"], required=True)
    p.add_argument("--eta-mode", choices=["fixed", "scaled"], default="fixed")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--twirl", action="store_true", help="Werner-twirl after every round (DEJMPS)")
    p.add_argument("--verify", action="store_true", help="cross-check against an exhaustive scan")
    p.add_argument("--out", default=None, help="write the rate curve CSV here")
    p.set_defaults(func=cmd_kopt)

    p = sub.add_parser("distill", help="distillation trajectory (CSV)")
    p.add_argument("--f0", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--protocol", choices=["bbpssw", "dejmps"], required=True)
    p.add_argument("--twirl", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_distill)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"e91rate {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CLIError as exc:
        print(f"e91rate {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
