"""Command line: ``kolmonet construct | verify | sweep``.

Exit codes: 0 success, 1 failed property, 2 configuration error, 3 calibration
failure, 4 numeric failure.  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import bench
from .constructor import (
    RateConstants,
    calibrate,
    cube_eta,
    hypothesis_kappa,
    closed_form_report,
    select_realization,
)
from .exceptions import CalibrationError, NumericError
from .network import save
from .oracle import ReferenceSolution, lp_error
from .problems import PROBLEMS, make_problem
from .rng import derive_seed

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CALIBRATION, EXIT_NUMERIC = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    problem: str = "heat-max"
    d: Optional[int] = None
    epsilon: float = 0.1
    p: float = 2.0
    T: float = 1.0
    seed: int = 0
    mode: str = "calibrated"
    M: Optional[int] = None
    delta: Optional[float] = None
    candidates: int = 8
    samples: Optional[int] = None
    out: Optional[str] = None
    extra: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def _common(sp, dim_required=False):
    sp.add_argument("--problem", choices=PROBLEMS, default=None)
    sp.add_argument("--dim", type=_positive_int, required=dim_required)
    sp.add_argument("--eps", type=_positive_float, default=None)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--T", type=_positive_float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=_positive_int, default=None)
    sp.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kolmonet", description="Deep ReLU approximations of Kolmogorov PDE solutions")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build, select and serialize an approximating network")
    _common(c, dim_required=True)
    c.add_argument("--mode", choices=("calibrated", "paper"), default="calibrated")
    c.add_argument("--M", type=_positive_int, default=None, help="override the Monte Carlo count")
    c.add_argument("--delta", type=_positive_float, default=None, help="override the step parameter")
    c.add_argument("--candidates", type=_positive_int, default=8)
    c.add_argument("--budget", type=_positive_int, default=1024, help="largest M tried by calibration")
    c.add_argument("--kappa", type=_positive_float, default=None)
    c.add_argument("--eta", type=float, default=None)
    c.add_argument("--dry-run", action="store_true", help="print the constants without building")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(bench.SUITES))
    _common(v)

    s = sub.add_parser("sweep", help="measure a convergence or growth rate")
    s.add_argument("kind", choices=sorted(bench.SWEEP_KINDS))
    _common(s)
    s.add_argument("--kappa", type=_positive_float, default=None)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        problem=args.problem or "heat-max",
        d=args.dim,
        epsilon=args.eps if args.eps is not None else 0.1,
        p=args.p,
        T=args.T,
        seed=args.seed,
        mode=getattr(args, "mode", "calibrated"),
        M=getattr(args, "M", None),
        delta=getattr(args, "delta", None),
        candidates=getattr(args, "candidates", 8),
        samples=args.samples,
        out=args.out,
        extra={k: getattr(args, k, None) for k in ("budget", "kappa", "eta", "dry_run", "suite", "kind")},
    )


def _emit(obj):
    print(json.dumps(obj, sort_keys=True, allow_nan=False, default=str))


def cmd_construct(cfg: RunConfig) -> int:
    if cfg.p < 1:
        raise ValueError("--p must be at least 1")
    if not 0 < cfg.epsilon <= 1:
        raise ValueError("--eps must lie in (0, 1]")
    problem = make_problem(cfg.problem, cfg.d, cfg.T)
    out = Path(cfg.out or ".")
    stem = f"{cfg.problem}-d{cfg.d}"

    if cfg.mode == "paper":
        if not cfg.extra.get("dry_run"):
            raise ValueError("paper-mode constants are far too large to build; add --dry-run")
        p = max(cfg.p, 2.0)
        kappa = cfg.extra.get("kappa") or hypothesis_kappa([problem], [cfg.epsilon], p)
        eta = cfg.extra.get("eta") or cube_eta(kappa, p)
        rep = closed_form_report(problem, cfg.epsilon, kappa, eta, p)
        c = rep.constants
        _emit({"mode": "paper", "problem": cfg.problem, "d": cfg.d, "epsilon": cfg.epsilon, "p": p,
               "kappa": kappa, "eta": eta, "M": c.M, "delta": c.delta, "log_M": c.log_M,
               "log_delta": c.log_delta, "steps": c.steps, "depth": rep.depth,
               "param_count": rep.param_count, "log_param_count": math.log(rep.param_count)})
        return EXIT_OK

    if problem.exact is not None:
        samples = cfg.samples or 2000
        reference = ReferenceSolution.closed_form(problem)
    else:
        # Feynman-Kac reference per probe point: fewer probes, coarser reference grid
        samples = cfg.samples or 64
        reference = ReferenceSolution.monte_carlo(problem, 4096, derive_seed(cfg.seed, "reference"), 128)
    if cfg.M is not None or cfg.delta is not None:
        M = cfg.M or 64
        delta = cfg.delta or min(1.0, math.sqrt(cfg.T))
        constants = RateConstants(M, delta, "override", math.log(M), math.log(delta))
    else:
        constants = calibrate(problem, cfg.epsilon, cfg.p, cfg.seed, cfg.extra.get("budget") or 1024,
                              reference, samples)
    report = select_realization(problem, constants, cfg.candidates, cfg.seed, cfg.epsilon, cfg.p,
                                reference, samples)
    selection_error = report.error
    report.error = lp_error(reference, report.network, problem.measure, cfg.p, samples,
                            derive_seed(cfg.seed, "evaluation"), cfg.T)
    record_extra = {"selection_error": selection_error.as_dict()}
    out.mkdir(parents=True, exist_ok=True)
    net_path = save(report.network, out / f"{stem}-network.json")
    record = report.to_record()
    record.update(record_extra)
    record["network_file"] = net_path.name
    record["meets_target"] = bool(report.error.estimate <= cfg.epsilon)
    rep_path = out / f"{stem}-report.json"
    rep_path.write_text(json.dumps(record, indent=1, sort_keys=True, allow_nan=False) + "\n")
    _emit({"param_count": report.param_count, "depth": report.depth, "M": report.M,
           "delta": report.delta, "error": report.error.estimate, "half_width": report.error.half_width,
           "meets_target": record["meets_target"], "network": str(net_path), "report": str(rep_path)})
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    kw = {"d": cfg.d}
    if cfg.extra.get("problem_given") and cfg.extra.get("suite") == "perturbation":
        kw["problems"] = (cfg.problem,)
    results = bench.run_suite(cfg.extra["suite"], cfg.samples, cfg.seed, **kw)
    for r in results:
        _emit(r.as_dict())
    failed = [r.name for r in results if not r.passed]
    _emit({"suite": cfg.extra["suite"], "checks": len(results), "failed": failed, "passed": not failed})
    return EXIT_FAILED if failed else EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    kind = cfg.extra["kind"]
    fixed = {}
    problem = cfg.problem
    if kind == "mc":
        fixed.update(d=cfg.d or 2, T=cfg.T, p=cfg.p)
        if cfg.samples:
            fixed["probes"] = cfg.samples
    elif kind == "euler":
        fixed.update(d=cfg.d or 1, T=cfg.T)
        if cfg.samples:
            fixed["samples"] = cfg.samples
    elif kind == "params-d":
        fixed.update(epsilon=cfg.epsilon if cfg.extra.get("eps_given") else 0.2, T=cfg.T, p=max(cfg.p, 2.0))
    else:
        fixed.update(d=cfg.d or 2, T=cfg.T, p=max(cfg.p, 2.0))
    if kind in ("params-d", "params-eps") and cfg.extra.get("kappa"):
        fixed["kappa"] = cfg.extra["kappa"]
    out = Path(cfg.out or f"sweep-{kind}.csv")
    res = bench.rate_sweep(kind, problem, None, fixed, cfg.seed, out)
    print(str(res.csv_path))
    _emit(res.summary())
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config(args)
    cfg.extra["eps_given"] = args.eps is not None
    cfg.extra["problem_given"] = args.problem is not None
    if args.command == "sweep" and args.problem is None:
        cfg.problem = {"mc": "heat-max", "euler": "ou-linear"}.get(args.kind, "heat-max")
    try:
        return COMMANDS[args.command](cfg)
    except CalibrationError as exc:
        print(f"kolmonet: calibration failed: {exc}", file=sys.stderr)
        if exc.best is not None:
            print(f"kolmonet: best constants M={exc.best.M} delta={exc.best.delta}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (NumericError, ArithmeticError) as exc:
        print(f"kolmonet: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError) as exc:
        print(f"kolmonet: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
