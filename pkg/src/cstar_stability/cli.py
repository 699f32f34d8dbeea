"""Command-line entry point.

    cstar-stability run CONFIG [--format csv|json] [--out PATH] [--strict]
    cstar-stability verify-axioms [CONFIG]
    cstar-stability stabilize [CONFIG]
    cstar-stability contract-check [CONFIG]
    cstar-stability decompose RE IM

CONFIG is a JSON file or one of the preset names (doubling, halving,
negative-control). Exit codes: 0 success, 2 invalid config, 3 hypothesis
violation under --strict, 4 convergence failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import report
from .config import PRESETS, ConfigError, from_dict, load_config, preset
from .control import PsiFunction, regime_constants
from .cstar_core import StabilityError
from .experiment import run_experiment
from .fixed_point import contraction_check, random_tabulated
from .stabilizer import HypothesisViolated, NotConverged, OutOfRange, three_unimodular

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_HYPOTHESIS = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5

log = logging.getLogger("cstar_stability")


def _resolve_config(source: str | None, args):
    if source is None:
        cfg = preset("doubling")
    elif source in PRESETS and not Path(source).exists():
        cfg = preset(source)
    else:
        try:
            cfg = load_config(source)
        except FileNotFoundError as err:
            raise OSError(f"config file not found: {source}") from err
    overrides = {}
    if args.seed is not None:
        overrides.setdefault("grid", {})["seed"] = args.seed
    if args.depth is not None:
        overrides.setdefault("run", {})["depth"] = args.depth
    if args.tol is not None:
        overrides.setdefault("run", {})["tol"] = args.tol
    if args.strict:
        overrides.setdefault("run", {})["strict"] = True
    if args.format is not None:
        overrides.setdefault("output", {})["format"] = args.format
    if args.out is not None:
        overrides.setdefault("output", {})["path"] = args.out
    if overrides:
        doc = cfg.to_dict()
        for section, values in overrides.items():
            doc[section].update(values)
        cfg = from_dict(doc)
    return cfg


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as err:
        raise report.ReportIOError(f"cannot write {path}: {err}") from err


def _finish(art, cfg) -> int:
    _write(report.render(art, cfg.output.format), cfg.output.path)
    bad = art.violations
    if bad:
        log.warning("violations: %s", ", ".join(bad))
        if cfg.run.strict:
            raise HypothesisViolated("; ".join(bad))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _resolve_config(args.config, args)
    return _finish(run_experiment(cfg), cfg)


def cmd_verify_axioms(args) -> int:
    cfg = _resolve_config(args.config, args)
    return _finish(run_experiment(cfg, stages=("axioms",)), cfg)


def cmd_stabilize(args) -> int:
    cfg = _resolve_config(args.config, args)
    stages = ("admissibility", "envelope", "orbit", "stabilization", "uniqueness")
    return _finish(run_experiment(cfg, stages=stages), cfg)


def cmd_contract_check(args) -> int:
    cfg = _resolve_config(args.config, args)
    control = cfg.build_control()
    grid = cfg.build_grid()
    regime, L = regime_constants(control)
    psi = PsiFunction(control, grid.space)
    rng = np.random.default_rng(cfg.grid.seed)
    pairs = [(random_tabulated(grid, rng, psi), random_tabulated(grid, rng, psi))
             for _ in range(args.pairs)]
    rep = contraction_check(pairs, psi, regime, L)
    doc = {"regime": regime, "lipschitz": L, "pairs": rep.pairs, "violations": rep.violations,
           "max_violation": rep.max_violation, "max_ratio": max(rep.ratios, default=0.0)}
    if cfg.output.format == "csv":
        text = "pair,ratio\n" + "".join(f"{i},{report.fmt(r)}\n" for i, r in enumerate(rep.ratios))
    else:
        text = report.dumps(doc)
    _write(text, cfg.output.path)
    if rep.violations and cfg.run.strict:
        raise HypothesisViolated(f"{rep.violations} pairs break the contraction bound")
    return EXIT_OK


def cmd_decompose(args) -> int:
    mus = three_unimodular(complex(args.re, args.im))
    if args.format == "csv":
        text = "re,im\n" + "".join(f"{report.fmt(m.real)},{report.fmt(m.imag)}\n" for m in mus)
    else:
        text = report.dumps({"z": complex(args.re, args.im), "mu": list(mus),
                             "sum_residual": abs(sum(mus) - complex(args.re, args.im))})
    _write(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="grid seed override")
    common.add_argument("--depth", type=int, help="Hyers iteration depth")
    common.add_argument("--tol", type=float, help="Cauchy tolerance")
    common.add_argument("--strict", action="store_true", help="exit non-zero on any violation")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="cstar-stability",
        description="Turn perturbed module derivations into exact ones and certify the result.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="full experiment from a config")
    p.add_argument("config", help="config path or preset name")
    p.set_defaults(func=cmd_run)

    for name, func, help_ in (
        ("verify-axioms", cmd_verify_axioms, "check the inner-product module axioms"),
        ("stabilize", cmd_stabilize, "compute and certify the Hyers limit"),
        ("contract-check", cmd_contract_check, "check d(Jg, Jh) <= L d(g, h) on random pairs"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("config", nargs="?", help="config path or preset name (default: doubling)")
        if name == "contract-check":
            p.add_argument("--pairs", type=int, default=100)
        p.set_defaults(func=func)

    p = sub.add_parser("decompose", parents=[common], help="write z as a sum of three unimodular numbers")
    p.add_argument("re", type=float)
    p.add_argument("im", type=float)
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except HypothesisViolated as err:
        print(f"hypothesis violated: {err}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NotConverged as err:
        print(f"not converged: {err}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OutOfRange as err:
        print(f"out of range: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except StabilityError as err:
        stage = getattr(err, "stage", None)
        print(f"error{f' in {stage}' if stage else ''}: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
