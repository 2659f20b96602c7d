"""``chronolab`` command line.

Exit codes: 0 on success (a divergent verdict is a successful report),
1 when a must-pass assertion or an analysis fails (each failure printed as
``FAIL <id>`` on stderr), 2 on configuration or usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, export, runner
from .config import load_config
from .errors import ChronolabError, ConfigError

THREADS_ENV = "CHRONOLAB_THREADS"


def _bounded_int(text: str, low: int, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}") from None
    if value < low:
        raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}")
    return value


def _positive_int(text: str) -> int:
    return _bounded_int(text, 1, "a positive integer")


def _count(text: str) -> int:
    return _bounded_int(text, 0, "a non-negative integer")


def _int_list(text: str) -> list[int]:
    values = [_positive_int(t) for t in text.split(",") if t.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _sign(text: str) -> int:
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    if text not in table:
        raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")
    return table[text]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"chronolab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        return p

    p = command("run", "execute every [[analysis]] in the config and emit a report")
    p.add_argument("--out", type=Path, help="report path (default: [output].report or stdout)")
    p.add_argument("--timings", action="store_true", help="include wall-times in the report")

    p = command("check", "summability conditions as JSON")
    p.add_argument("--horizon", required=True, type=_positive_int)
    p.add_argument("--condition", default="both",
                   choices=["both", "inverse_square", "hilbert_schmidt"])

    p = command("build", "write a truncation as Matrix Market plus a JSON sidecar")
    p.add_argument("-N", required=True, type=_positive_int, help="levels")
    p.add_argument("--alpha", help="perturbation: const:T | sqsum:A,E | custom:v1,v2,...")
    p.add_argument("--out", required=True, type=Path)

    p = command("ccr", "commutator residual table for the canonical-domain generators")
    p.add_argument("-L", required=True, type=_positive_int, help="highest level of the generators")
    p.add_argument("--exact", action="store_true", help="force exact rational arithmetic")
    p.add_argument("--random", type=_count, default=0, dest="n_random",
                   help="additional seeded random elements")
    p.add_argument("--alpha", help="evaluate with a diagonal perturbation")
    p.add_argument("--json", type=Path, help="also write the table as JSON")

    p = command("spectrum-of-T", "eigenvalue convergence CSV")
    p.add_argument("-N", required=True, type=_int_list, help="comma-separated horizons")
    p.add_argument("--top", type=_positive_int, default=5)
    p.add_argument("--out", type=Path, help="CSV path (default stdout)")

    p = command("deficiency", "rectangular (T +- i) probe as JSON")
    p.add_argument("-N", required=True, type=_positive_int)
    p.add_argument("-R", type=_positive_int, help="row levels (default 3N)")
    p.add_argument("--sign", type=_sign, default=1, help="+ or -")
    p.add_argument("--channel", default="full", choices=["full", "difference", "symmetric"])

    p = command("kernel-check", "quadrature of |K_N|^2 against the series, as JSON")
    p.add_argument("-N", required=True, type=_positive_int)
    p.add_argument("--nodes", required=True, type=_positive_int, help="Gauss-Legendre nodes per axis")
    p.add_argument("--length", type=float, default=1.0, help="box length")
    p.add_argument("--dump-grid", type=Path, help="write (q, q', Re K, Im K) CSV")

    p = command("class-gen", "K perturbed operators from an alpha spec, CCR re-run on each")
    p.add_argument("--alpha", help="family template (default: mixed kinds)")
    p.add_argument("-K", required=True, type=_positive_int)
    p.add_argument("-L", required=True, type=_positive_int)
    p.add_argument("-N", type=_positive_int, help="truncation size for the Hermiticity check")
    return parser


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _ccr_table(result: runner.AnalysisResult) -> str:
    rows = result.data["rows"]
    width = max([len("generator")] + [len(r["generator"]) for r in rows])
    lines = [f"{'generator':<{width}}  {'residual':>24}  {'defect':>24}  verdict"]
    for r in rows:
        lines.append(f"{r['generator']:<{width}}  {export.fmt_float(r['residual_norm']):>24}  "
                     f"{export.fmt_float(r['defect_norm']):>24}  {r['verdict']}")
    return "\n".join(lines) + "\n"


def _execute(args) -> list:
    cfg = load_config(args.config)
    spec = cfg.spectrum
    if args.command == "run":
        report = runner.run(cfg, timings=args.timings)
        _emit(export.dumps(report), args.out or cfg.output_path("report"))
        return report["failures"]
    if args.command == "check":
        res = runner.analyse_check(spec, args.horizon, args.condition)
        _emit(export.dumps(res.data), None)
    elif args.command == "build":
        res = runner.analyse_build(spec, args.N, args.alpha, args.out)
        _emit(export.dumps(res.data), None)
    elif args.command == "ccr":
        res = runner.analyse_ccr(spec, args.L, args.exact, args.n_random, cfg.seed, args.alpha)
        _emit(_ccr_table(res), None)
        if args.json is not None:
            _emit(export.dumps(res.data), args.json)
    elif args.command == "spectrum-of-T":
        res = runner.analyse_spectrum(spec, args.N, args.top)
        _emit(runner.spectrum_csv(res), args.out)
    elif args.command == "deficiency":
        res = runner.analyse_deficiency(spec, args.N, args.R, args.sign, args.channel)
        _emit(export.dumps(res.data), None)
    elif args.command == "kernel-check":
        res = runner.analyse_kernel(spec, args.N, args.nodes, args.length, args.dump_grid)
        _emit(export.dumps(res.data), None)
    else:
        res = runner.analyse_class_gen(spec, args.K, args.L, args.N, args.alpha, cfg.seed)
        _emit(export.dumps(res.data), None)
    return res.failures


def _thread_limit():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"must be a positive integer, got {value!r}") from None
    if n < 1:
        raise ConfigError(THREADS_ENV, f"must be a positive integer, got {value!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            failures = _execute(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChronolabError as exc:
        print(f"FAIL {exc.failure_id}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"FAIL io.error: {exc}", file=sys.stderr)
        return 1
    for failure in failures:
        print(f"FAIL {failure}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
