"""``mk-cat`` command-line entry point.

Exit codes: 0 success, 2 usage error, 1 numerical failure (a JSON object
describing the failure is written to stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from .closed_form import DEFAULT_VARIANT, VARIANTS, CatSpec, correlation_cat, correlation_mixture
from .displaced import DisplacementAssignment, correlation_displaced, paper_beta_schedule
from .errors import EngineMismatchError, MKCatError, NoSignChangeError
from .expansion import CONVENTIONS, MAX_MODES, expand
from .fock import (
    Truncation,
    oracle_correlation_displaced,
    oracle_correlation_mixture,
    oracle_correlation_rotated,
)
from .optimizer import OptimizerConfig, maximize_displaced_signal
from .report import reproduce_all
from .sweep import (
    CROSS_CHECK_TOL,
    CrossingQuery,
    alpha_grid,
    dip_extremum,
    find_level_crossing,
    named_level,
    render,
    signal_function,
    sweep,
)

ENGINE_NAMES = {"closed": "closed-form", "oracle": "oracle", "both": "both"}
_ANGLE_RE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*(pi)?\s*(?:/\s*(\d+\.?\d*))?\s*$")


class UsageError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Parse ``0.3``, ``pi/4``, ``-3pi/4`` or ``-3*pi/4``."""
    m = _ANGLE_RE.match(text)
    if not m or not (m.group(2) or m.group(3)):
        raise ValueError(f"cannot parse angle {text!r}")
    sign, num, pi, den = m.groups()
    value = float(num) if num else 1.0
    if pi:
        value *= math.pi
    if den:
        value /= float(den)
    return -value if sign == "-" else value


def _angles(text: str) -> list[float]:
    try:
        return [parse_angle(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--angles: {exc}") from None


def _mode_count(text: str) -> int:
    n = int(text)
    if not 2 <= n <= MAX_MODES:
        raise argparse.ArgumentTypeError(f"must be between 2 and {MAX_MODES}")
    return n


def _nonneg(text: str) -> float:
    x = float(text)
    if not math.isfinite(x) or x < 0:
        raise argparse.ArgumentTypeError("must be a finite nonnegative number")
    return x


def _positive_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return x


def _fmt(x: float, precision: int) -> str:
    return f"{x:.{precision}g}"


def _common(p: argparse.ArgumentParser, *, engine=True, formalism=True, alpha=True) -> None:
    p.add_argument("--n", type=_mode_count, default=3, help="number of modes (default 3)")
    if alpha:
        p.add_argument("--alpha", type=_nonneg, default=1.0, help="coherent amplitude (real, >= 0)")
    if formalism:
        p.add_argument("--formalism", choices=("rotated", "displaced", "mixture"), default="rotated")
    if engine:
        p.add_argument("--engine", choices=tuple(ENGINE_NAMES), default="closed")
    p.add_argument("--dim", type=_positive_int, default=64, help="Fock truncation for the oracle")
    p.add_argument("--k-variant", choices=VARIANTS, default=DEFAULT_VARIANT,
                   help="closed-form diagonal factor: published form or exact operator value")
    p.add_argument("--precision", type=_positive_int, default=6, help="significant digits")
    p.add_argument("--output", type=Path, help="write output here instead of stdout")


def _optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--starts", type=_positive_int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=_positive_int, default=2000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--box", type=float, default=math.pi / 2, help="random-start half-width times alpha")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mk-cat", description=(
        "Mermin-Klyshko signals of n-mode entangled coherent states with rotated "
        "or displaced parity measurements."))
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("correlation", help="one correlation at a single alpha")
    _common(p)
    p.add_argument("--angles", help="comma-separated angles, e.g. 0,-pi/4,pi/4")
    p.add_argument("--betas", help="JSON array of n [re, im] displacements")

    p = sub.add_parser("mk-signal", help="MK signal at a single alpha")
    _common(p)
    p.add_argument("--rescaled", action="store_true", help="divide by the local bound 2^((n-1)/2)")
    p.add_argument("--beta-schedule", choices=("paper", "file"), default="paper")
    p.add_argument("--beta-file", type=Path, help="JSON array of [re, im] pairs, primed after unprimed")
    p.add_argument("--convention", choices=CONVENTIONS, default="normalized")

    p = sub.add_parser("sweep", help="signal over an alpha grid")
    _common(p, alpha=False)
    p.add_argument("--alpha-min", type=_nonneg, default=0.0)
    p.add_argument("--alpha-max", type=_nonneg, default=2.0)
    p.add_argument("--steps", type=_positive_int, default=201)
    p.add_argument("--rescaled", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("crossing", help="alpha where the signal reaches a level")
    _common(p, alpha=False)
    p.add_argument("--level", default="classical", help="classical, genuine, or a number (S_n units)")
    p.add_argument("--bracket", type=_nonneg, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--tolerance", type=float, default=1e-4)

    p = sub.add_parser("dip", help="minimum of the rotated S_n below the classical crossing")
    _common(p, engine=False, formalism=False, alpha=False)

    p = sub.add_parser("expand", help="print the MK operator expansion")
    p.add_argument("--n", type=_mode_count, default=3)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--convention", choices=CONVENTIONS, default="normalized")
    p.add_argument("--output", type=Path)

    p = sub.add_parser("optimize", help="maximize the displaced-parity signal")
    p.add_argument("--n", type=_mode_count, default=3)
    p.add_argument("--alpha", type=_nonneg, default=1.0)
    _optimizer_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.add_argument("--precision", type=_positive_int, default=6)
    p.add_argument("--output", type=Path)

    p = sub.add_parser("reproduce-all", help="write every figure dataset and quoted number")
    p.add_argument("--output-dir", type=Path, default=Path("reproduction"))
    _optimizer_flags(p)
    p.add_argument("--k-variant", choices=VARIANTS, default=DEFAULT_VARIANT)
    return parser


def _write(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    try:
        output.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise MKCatError(f"cannot write {output}: {exc.strerror or exc}") from exc


def _both(closed: float, oracle: float, alpha: float) -> float:
    if abs(closed - oracle) > CROSS_CHECK_TOL:
        raise EngineMismatchError(
            f"closed-form and oracle disagree by {abs(closed - oracle):.3g}", alpha, closed, oracle)
    return closed


def _load_betas(args) -> DisplacementAssignment:
    if args.beta_schedule == "paper":
        if args.beta_file is not None:
            raise UsageError("--beta-file requires --beta-schedule file")
        if args.alpha == 0:
            raise UsageError("--alpha must be > 0 for the standard displacement schedule")
        return paper_beta_schedule(args.alpha, args.n)
    if args.beta_file is None:
        raise UsageError("--beta-schedule file requires --beta-file")
    try:
        assign = DisplacementAssignment.load(args.beta_file)
    except (OSError, ValueError) as exc:
        raise UsageError(f"--beta-file: {exc}") from None
    if len(assign) != args.n:
        raise UsageError(f"--beta-file: {len(assign)} modes given, --n is {args.n}")
    return assign


def cmd_correlation(args) -> str:
    spec = CatSpec(args.n, args.alpha)
    t = Truncation(args.dim)
    engine = ENGINE_NAMES[args.engine]
    if args.formalism == "displaced":
        if args.betas is None or args.angles is not None:
            raise UsageError("--formalism displaced takes --betas (and not --angles)")
        try:
            raw = json.loads(args.betas)
            betas = [complex(float(re_), float(im)) for re_, im in raw]
        except (ValueError, TypeError) as exc:
            raise UsageError(f"--betas: {exc}") from None
        if len(betas) != args.n:
            raise UsageError(f"--betas: expected {args.n} entries, got {len(betas)}")
        closed = lambda: correlation_displaced(spec, betas)
        oracle = lambda: oracle_correlation_displaced(spec, betas, t)
    else:
        if args.angles is None or args.betas is not None:
            raise UsageError(f"--formalism {args.formalism} takes --angles (and not --betas)")
        angles = _angles(args.angles)
        if len(angles) != args.n:
            raise UsageError(f"--angles: expected {args.n} angles, got {len(angles)}")
        if args.formalism == "rotated":
            closed = lambda: correlation_cat(spec, angles, args.k_variant)
            oracle = lambda: oracle_correlation_rotated(spec, angles, t)
        else:
            closed = lambda: correlation_mixture(spec, angles, args.k_variant)
            oracle = lambda: oracle_correlation_mixture(spec, angles, t)
    if engine == "closed-form":
        value = closed()
    elif engine == "oracle":
        value = oracle()
    else:
        value = _both(closed(), oracle(), args.alpha)
    return _fmt(value, args.precision) + "\n"


def cmd_mk_signal(args) -> str:
    engine = ENGINE_NAMES[args.engine]
    if args.formalism != "displaced":
        if args.beta_file is not None or args.beta_schedule != "paper":
            raise UsageError("--beta-schedule/--beta-file apply only to --formalism displaced")
        if args.convention != "normalized":
            raise UsageError("--convention applies only to --formalism displaced")
        assignment = None
    else:
        assign = _load_betas(args)
        assignment = lambda a: assign
    if args.formalism == "displaced" and args.convention == "unnormalized":
        if engine != "closed-form":
            raise UsageError("--convention unnormalized is only available with --engine closed")
        from .displaced import mk_signal_displaced
        value = mk_signal_displaced(CatSpec(args.n, args.alpha), assign, "unnormalized")
        if args.rescaled:
            value /= 2.0 ** (args.n - 1)
        return _fmt(value, args.precision) + "\n"

    def fn(eng):
        return signal_function(args.n, args.formalism, eng, args.rescaled, args.k_variant,
                               args.dim, assignment)

    if engine == "both":
        value = _both(fn("closed-form")(args.alpha), fn("oracle")(args.alpha), args.alpha)
    else:
        value = fn(engine)(args.alpha)
    return _fmt(value, args.precision) + "\n"


def cmd_sweep(args) -> str:
    if args.alpha_max < args.alpha_min:
        raise UsageError("--alpha-max must be >= --alpha-min")
    grid = alpha_grid(args.alpha_min, args.alpha_max, args.steps)
    records = sweep(args.n, args.formalism, ENGINE_NAMES[args.engine], grid,
                    rescaled=args.rescaled, variant=args.k_variant, dim=args.dim)
    return render(records, args.format)


def _auto_bracket(fn, level: float, lo=0.0, hi=4.0, step=0.01) -> tuple[float, float]:
    """First upward crossing of ``level`` on a coarse grid."""
    grid = np.arange(lo, hi + step / 2, step)
    prev = None
    for a in grid:
        below = fn(float(a)) < level
        if prev is not None and prev[1] and not below:
            return prev[0], float(a)
        prev = (float(a), below)
    raise NoSignChangeError(f"signal never rises through {level:.6g} on [{lo}, {hi}]",
                            (lo, hi), (fn(lo), fn(hi)))


def cmd_crossing(args) -> str:
    try:
        level = named_level(args.n, args.level)
    except ValueError as exc:
        raise UsageError(f"--level: {exc}") from None
    engine = ENGINE_NAMES[args.engine]
    if engine == "both":
        raise UsageError("--engine both is not supported for crossing; run each engine")
    if args.formalism == "displaced":
        lo = 0.5 if args.bracket is None else args.bracket[0]
        if lo == 0:
            raise UsageError("--bracket: the displaced formalism needs alpha > 0")
    fn = signal_function(args.n, args.formalism, engine, False, args.k_variant, args.dim)
    bracket = tuple(args.bracket) if args.bracket else _auto_bracket(
        fn, level, lo=0.5 if args.formalism == "displaced" else 0.0,
        hi=10.0 if args.formalism == "displaced" else 4.0)
    alpha = find_level_crossing(fn, CrossingQuery(level, bracket, args.tolerance))
    return _fmt(alpha, args.precision) + "\n"


def cmd_dip(args) -> str:
    alpha, value = dip_extremum(args.n, args.k_variant)
    return json.dumps({"alpha": float(_fmt(alpha, args.precision)),
                       "value": float(_fmt(value, args.precision))}) + "\n"


def cmd_expand(args) -> str:
    exp = expand(args.n, args.convention)
    if args.format == "json":
        return json.dumps(exp.to_dict(), indent=2) + "\n"
    lines = []
    for c, tags in exp.terms:
        ops = " ".join(f"s{k + 1}{chr(39) if t else ''}" for k, t in enumerate(tags))
        sign = "-" if c.m < 0 else "+"
        mag = abs(c)
        lines.append(f"{sign} {mag} {ops}")
    return "\n".join(lines) + "\n"


def _opt_cfg(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(starts=args.starts, max_iters=args.max_iters, tol=args.tol,
                               box=args.box, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_optimize(args) -> str:
    if args.alpha == 0:
        raise UsageError("--alpha must be > 0 for the optimizer")
    result = maximize_displaced_signal(CatSpec(args.n, args.alpha), _opt_cfg(args))
    if args.format == "json":
        return json.dumps(result.to_dict(), indent=2) + "\n"
    return (f"best_value {_fmt(result.best_value, args.precision)}\n"
            f"schedule_value {_fmt(result.schedule_value, args.precision)}\n"
            f"best_start {result.best_index}\nconverged {str(result.converged).lower()}\n")


def cmd_reproduce_all(args) -> str:
    paths = reproduce_all(args.output_dir, _opt_cfg(args), args.k_variant)
    return "".join(f"{p}\n" for p in paths)


COMMANDS = {
    "correlation": cmd_correlation,
    "mk-signal": cmd_mk_signal,
    "sweep": cmd_sweep,
    "crossing": cmd_crossing,
    "dip": cmd_dip,
    "expand": cmd_expand,
    "optimize": cmd_optimize,
    "reproduce-all": cmd_reproduce_all,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
        if args.command != "reproduce-all":
            _write(text, getattr(args, "output", None))
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"mk-cat {args.command}: error: {exc}\n")
        return 2
    except MKCatError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
