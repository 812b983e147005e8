"""Alpha sweeps, threshold bisection, the S_3 dip, and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .closed_form import DEFAULT_VARIANT, CatSpec, correlation_cat, correlation_mixture
from .displaced import DisplacementAssignment, mk_signal_displaced, paper_beta_schedule
from .errors import EngineMismatchError, MKCatError, NoSignChangeError
from .expansion import MAX_MODES, expand, lhv_bound, mk_value
from .fock import (
    Truncation,
    oracle_correlation_displaced,
    oracle_correlation_mixture,
    oracle_correlation_rotated,
)

FORMALISMS = ("rotated", "displaced", "mixture")
ENGINES = ("closed-form", "oracle")
RECORD_FORMALISMS = FORMALISMS + ("lhv-bound",)
CSV_HEADER = ("alpha", "value", "n", "formalism", "engine")
CROSS_CHECK_TOL = 1e-6


@dataclass(frozen=True)
class SweepRecord:
    alpha: float
    value: float
    n: int
    formalism: str
    engine: str

    def __post_init__(self):
        if self.formalism not in RECORD_FORMALISMS:
            raise ValueError(f"unknown formalism tag {self.formalism!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine tag {self.engine!r}")


@dataclass(frozen=True)
class CrossingQuery:
    level: float
    bracket: tuple[float, float]
    tolerance: float = 1e-4


class EmitError(MKCatError):
    pass


def genuine_level(n: int) -> float:
    """Genuine n-partite entanglement threshold on S_n: 2^(n-1)/sqrt(2)."""
    return 2.0 ** (n - 1) / math.sqrt(2.0)


def named_level(n: int, name: str | float) -> float:
    if isinstance(name, (int, float)):
        return float(name)
    if name == "classical":
        return lhv_bound(n)
    if name == "genuine":
        return genuine_level(n)
    try:
        return float(name)
    except ValueError:
        raise ValueError(f"unknown level {name!r}; use classical, genuine or a number") from None


def _check_formalism(formalism: str, engine: str) -> None:
    if formalism not in FORMALISMS:
        raise ValueError(f"unknown formalism {formalism!r}")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")


def signal_function(n: int, formalism: str = "rotated", engine: str = "closed-form",
                    rescaled: bool = False, variant: str = DEFAULT_VARIANT,
                    dim: int = 64, assignment: Callable[[float], DisplacementAssignment] | None = None
                    ) -> Callable[[float], float]:
    """Return alpha -> S_n (or R_n) for the chosen formalism and engine.

    The displaced formalism uses the standard displacement schedule unless an
    ``assignment`` factory is supplied.
    """
    _check_formalism(formalism, engine)
    if not 2 <= n <= MAX_MODES:
        raise ValueError(f"n must lie in 2..{MAX_MODES}")
    scale = 1.0 / lhv_bound(n) if rescaled else 1.0
    t = Truncation(dim)

    if formalism == "displaced":
        factory = assignment or (lambda a: paper_beta_schedule(a, n))

        def displaced(alpha: float) -> float:
            spec = CatSpec(n, alpha)
            assign = factory(alpha)
            if engine == "closed-form":
                return scale * mk_signal_displaced(spec, assign)
            total = 0.0
            for c, tags in expand(n).terms:
                betas = [assign.pairs[k][tg] for k, tg in enumerate(tags)]
                total += float(c) * oracle_correlation_displaced(spec, betas, t)
            return scale * abs(total)

        return displaced

    def rotated(alpha: float) -> float:
        spec = CatSpec(n, alpha)
        if formalism == "rotated":
            corr = (lambda a: correlation_cat(spec, a, variant)) if engine == "closed-form" \
                else (lambda a: oracle_correlation_rotated(spec, a, t))
        else:
            corr = (lambda a: correlation_mixture(spec, a, variant)) if engine == "closed-form" \
                else (lambda a: oracle_correlation_mixture(spec, a, t))
        return scale * abs(mk_value(n, corr))

    return rotated


def correlation_function(n: int, angles: Sequence[float], formalism: str = "rotated",
                         engine: str = "closed-form", variant: str = DEFAULT_VARIANT,
                         dim: int = 64) -> Callable[[float], float]:
    _check_formalism(formalism, engine)
    if formalism == "displaced":
        raise ValueError("angle correlations are defined for the rotated and mixture formalisms")
    t = Truncation(dim)
    if formalism == "rotated":
        if engine == "closed-form":
            return lambda a: correlation_cat(CatSpec(n, a), angles, variant)
        return lambda a: oracle_correlation_rotated(CatSpec(n, a), angles, t)
    if engine == "closed-form":
        return lambda a: correlation_mixture(CatSpec(n, a), angles, variant)
    return lambda a: oracle_correlation_mixture(CatSpec(n, a), angles, t)


def _check_grid(alpha_grid: Sequence[float], positive: bool = False) -> np.ndarray:
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("alpha grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(grid)) or grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("alpha grid must be finite, nonnegative and strictly increasing")
    if positive and grid[0] == 0:
        raise ValueError("the displaced formalism needs alpha > 0")
    return grid


def alpha_grid(lo: float = 0.0, hi: float = 2.0, steps: int = 201) -> list[float]:
    """``steps`` evenly spaced points, rounded so 0.01 steps print exactly."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if steps == 1:
        return [float(lo)]
    return [round(lo + (hi - lo) * i / (steps - 1), 12) for i in range(steps)]


def _records(fn_closed, fn_oracle, grid, n, formalism, engine) -> list[SweepRecord]:
    out = []
    for a in grid:
        a = float(a)
        if engine == "both":
            v, w = fn_closed(a), fn_oracle(a)
            if abs(v - w) > CROSS_CHECK_TOL:
                raise EngineMismatchError(
                    f"closed-form and oracle disagree at alpha={a!r} by {abs(v - w):.3g}", a, v, w)
            out.append(SweepRecord(a, v, n, formalism, "closed-form"))
        else:
            fn = fn_closed if engine == "closed-form" else fn_oracle
            out.append(SweepRecord(a, fn(a), n, formalism, engine))
    return out


def _engine_pair(engine: str):
    if engine not in ENGINES + ("both",):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def sweep(n: int, formalism: str, engine: str, alpha_grid: Sequence[float],
          rescaled: bool = False, variant: str = DEFAULT_VARIANT, dim: int = 64) -> list[SweepRecord]:
    """MK signal (or rescaled signal) at each grid point.

    ``engine="both"`` evaluates closed form and oracle and raises
    :class:`EngineMismatchError` past 1e-6.
    """
    _engine_pair(engine)
    grid = _check_grid(alpha_grid, positive=formalism == "displaced")
    closed = signal_function(n, formalism, "closed-form", rescaled, variant, dim)
    oracle = signal_function(n, formalism, "oracle", rescaled, variant, dim)
    return _records(closed, oracle, grid, n, formalism, engine)


def correlation_sweep(n: int, angles: Sequence[float], formalism: str, engine: str,
                      alpha_grid: Sequence[float], variant: str = DEFAULT_VARIANT,
                      dim: int = 64) -> list[SweepRecord]:
    _engine_pair(engine)
    grid = _check_grid(alpha_grid)
    closed = correlation_function(n, angles, formalism, "closed-form", variant, dim)
    oracle = correlation_function(n, angles, formalism, "oracle", variant, dim)
    return _records(closed, oracle, grid, n, formalism, engine)


def find_level_crossing(fn: Callable[[float], float], query: CrossingQuery) -> float:
    """Bisect ``fn(alpha) - level`` on the bracket to ``query.tolerance``."""
    lo, hi = map(float, query.bracket)
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    f_lo, f_hi = fn(lo) - query.level, fn(hi) - query.level
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChangeError(
            f"signal does not cross {query.level:.6g} on [{lo:.6g}, {hi:.6g}]",
            (lo, hi), (f_lo + query.level, f_hi + query.level))
    return float(bisect(lambda a: fn(a) - query.level, lo, hi, xtol=query.tolerance))


def find_crossing(n: int, formalism: str, query: CrossingQuery, engine: str = "closed-form",
                  variant: str = DEFAULT_VARIANT, dim: int = 64) -> float:
    """Alpha at which S_n (not R_n) reaches ``query.level``."""
    return find_level_crossing(signal_function(n, formalism, engine, False, variant, dim), query)


def dip_extremum(n: int = 3, variant: str = DEFAULT_VARIANT, bracket=(0.0, 0.36),
                 tol: float = 1e-4) -> tuple[float, float]:
    """Golden-section minimum of S_n on ``bracket``."""
    fn = signal_function(n, "rotated", "closed-form", False, variant)
    lo, hi = bracket
    grid = np.linspace(lo, hi, 37)[1:-1]
    vals = [fn(a) for a in grid]
    i = int(np.clip(np.argmin(vals), 1, len(grid) - 2))
    res = minimize_scalar(fn, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden",
                          options={"xtol": tol / max(grid[i], tol)})
    return float(res.x), float(res.fun)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render(records: Sequence[SweepRecord], fmt: str = "csv") -> str:
    rows = sorted(records, key=lambda r: (r.alpha, r.n, r.formalism))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_fmt(float(r.alpha)), _fmt(float(r.value)), r.n, r.formalism, r.engine])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected csv or json")


def emit(records: Sequence[SweepRecord], fmt: str, path: str | Path) -> Path:
    text = render(records, fmt)
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
