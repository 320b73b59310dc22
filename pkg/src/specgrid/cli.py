"""Command line interface for spectral grid experiments.

Verbs map one-to-one onto run modes:

* ``gamma1``          selfadjoint operator spectrum
* ``gamma2``          relatively compact perturbation (decomposed operator)
* ``gamma3``          Schrodinger operator -Laplacian + V
* ``oracle-compare``  gamma1 against the eigenvalue-distance oracle
* ``converge``        distance table against a reference descriptor

Each verb takes ``--config`` (JSON file, see README for the schema) and the
overrides ``--n``, ``--l``, ``--out``, ``--workers``, ``--cap``.  Exit code
0 on success, 2 on validation errors, 3 on resource-limit errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .errors import ResourceLimitError, ValidationError
from .experiments import ExperimentConfig, RunArtifact, run_experiment

_VERB_MODES = {
    "gamma1": "gamma1",
    "gamma2": "gamma2",
    "gamma3": "gamma3",
    "oracle-compare": "oracle-compare",
    "converge": "convergence",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specgrid",
        description="Grid-based spectra of selfadjoint operators, their "
        "relatively compact perturbations, and Schrodinger operators.",
    )
    parser.add_argument("--version", action="version", version=f"specgrid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "gamma1": "spectrum of a selfadjoint operator",
        "gamma2": "spectrum of a perturbed operator T + V",
        "gamma3": "spectrum of -Laplacian + V",
        "oracle-compare": "cross-check gamma1 against the eigensolver oracle",
        "converge": "tabulate distances to a reference set over levels",
    }
    for verb in _VERB_MODES:
        sp = sub.add_parser(verb, help=helps[verb])
        sp.add_argument("--config", metavar="PATH", help="JSON experiment config")
        sp.add_argument(
            "--n",
            metavar="LIST",
            help="comma-separated strictly increasing levels, e.g. 1,2,4",
        )
        sp.add_argument(
            "--l",
            type=int,
            metavar="INT",
            help="sampling resolution override (gamma3 relaxed mode)",
        )
        sp.add_argument("--out", metavar="DIR", help="output directory for artifacts")
        sp.add_argument("--workers", type=int, metavar="INT", help="worker thread count")
        sp.add_argument("--cap", type=int, metavar="INT", help="truncation size cap")
    return parser


def _parse_levels(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError as exc:
            raise ValidationError(f"n: expected integers, got {part!r}") from exc
    if not out:
        raise ValidationError("n: no levels given")
    return out


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    mode = _VERB_MODES[args.command]
    if args.config is not None:
        raw = ExperimentConfig.raw_from_file(args.config)
    else:
        raw = {}
    if "mode" in raw and raw["mode"] != mode:
        raise ValidationError(
            f"mode: config file says {raw['mode']!r} but the command is {args.command!r}"
        )
    raw["mode"] = mode
    if args.n is not None:
        raw["levels"] = _parse_levels(args.n)
    if args.l is not None:
        raw["l"] = args.l
    if args.out is not None:
        raw["out"] = args.out
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.cap is not None:
        raw["cap"] = args.cap
    return ExperimentConfig.from_dict(raw)


def _print_artifact(art: RunArtifact) -> None:
    cfg = art.config
    for lev in art.levels:
        s = lev.result
        line = (
            f"n={lev.n} algorithm={s.algorithm} points={len(s.points)} "
            f"threshold={s.threshold:.6g}"
        )
        if "l" in s.info:
            line += f" l={s.info['l']}"
        if "error_bound" in s.info:
            line += f" error_bound={s.info['error_bound']:.6g}"
        oracle = lev.extra.get("oracle")
        if oracle is not None:
            line += f" discrepancy={oracle['discrepancy']['count']}"
        if lev.point_file:
            line += f" file={lev.point_file}"
        print(line)
    if art.table is not None:
        for row in art.table:
            print(
                f"n={row['n']} points={row['point_count']} "
                f"d_K={row['d_K']:.6g} d_AW={row['d_AW']:.6g} "
                f"(+/- {row['d_AW_slack']:.2g})"
            )
        for name, flag in (art.trend or {}).items():
            print(f"{name}: {'yes' if flag else 'no'}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        art = run_experiment(cfg)
        _print_artifact(art)
    except ValidationError as exc:
        print(f"specgrid: error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"specgrid: resource limit: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
