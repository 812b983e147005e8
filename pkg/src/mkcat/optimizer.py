"""Multi-start Nelder-Mead maximization of the displaced-parity MK signal.

Parameters are the 4n reals [Re b1, Im b1, Re b1', Im b1', ...].  Each start
runs the simplex search twice, on the signed sum and on its negation, and
keeps the larger absolute value; this sidesteps the kink of |.| at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .closed_form import CatSpec
from .displaced import DisplacedSignal, DisplacementAssignment, paper_beta_schedule
from .errors import NonFiniteObjectiveError
from .parallel import ordered_map


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 32
    max_iters: int = 2000
    tol: float = 1e-8
    box: float = math.pi / 2  # half-width of the random-start box, in units of 1/alpha
    seed: int = 0
    convention: str = "normalized"

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not self.box > 0:
            raise ValueError("box must be > 0")


@dataclass(frozen=True)
class StartTrace:
    index: int
    kind: str
    start: tuple[float, ...]
    start_value: float
    final_value: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "start": list(self.start),
            "start_value": self.start_value,
            "final_value": self.final_value,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class OptimizationResult:
    n: int
    alpha: float
    best_value: float
    best_assignment: DisplacementAssignment
    traces: tuple[StartTrace, ...] = field(repr=False)
    converged: bool
    seed: int
    schedule_value: float

    @property
    def best_index(self) -> int:
        return max(self.traces, key=lambda tr: (tr.final_value, -tr.index)).index

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "best_value": self.best_value,
            "best_assignment": self.best_assignment.to_json(),
            "best_start": self.best_index,
            "converged": self.converged,
            "seed": self.seed,
            "starts": len(self.traces),
            "schedule_value": self.schedule_value,
            "traces": [tr.to_dict() for tr in self.traces],
        }


def objective(spec: CatSpec, flat_params, convention: str = "normalized") -> float:
    """|MK signal| for the flattened displacement vector."""
    value = DisplacedSignal(spec, convention).signed_flat(np.asarray(flat_params, dtype=float))
    if not math.isfinite(value):
        raise NonFiniteObjectiveError("objective is not finite", flat_params)
    return abs(value)


def start_points(spec: CatSpec, cfg: OptimizerConfig) -> list[tuple[str, np.ndarray]]:
    """Standard schedule, the origin, then uniform points in [-box/alpha, box/alpha]^{4n}."""
    alpha = abs(spec.alpha)
    dim = 4 * spec.n
    rng = np.random.default_rng(cfg.seed)
    half = cfg.box / alpha
    points = [("schedule", paper_beta_schedule(alpha, spec.n).to_flat())]
    if cfg.starts >= 2:
        points.append(("zero", np.zeros(dim)))
    for _ in range(cfg.starts - 2):
        points.append(("random", rng.uniform(-half, half, dim)))
    return points[: cfg.starts]


def _local_search(job) -> tuple:
    spec, cfg, x0 = job
    sig = DisplacedSignal(spec, cfg.convention)
    alpha = abs(spec.alpha)
    step = 0.1 * cfg.box / alpha
    simplex = np.vstack([x0, x0 + step * np.eye(x0.size)])

    def check(x, v):
        if not math.isfinite(v):
            raise NonFiniteObjectiveError("objective is not finite", x)
        return v

    start_value = abs(check(x0, sig.signed_flat(x0)))
    best = None
    for sign in (1.0, -1.0):
        res = minimize(
            lambda x: -sign * check(x, sig.signed_flat(x)),
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iters,
                "maxfev": 2 * cfg.max_iters,
                "xatol": cfg.tol,
                "fatol": cfg.tol,
                "adaptive": True,
                "initial_simplex": simplex,
            },
        )
        value = float(-res.fun)
        if best is None or value > best[0]:
            best = (value, np.asarray(res.x, dtype=float), int(res.nit), bool(res.status == 0))
    return start_value, best


def maximize_displaced_signal(spec: CatSpec, cfg: OptimizerConfig | None = None,
                              workers: int | None = None) -> OptimizationResult:
    cfg = cfg or OptimizerConfig()
    alpha = abs(spec.alpha)
    if alpha == 0.0:
        raise ValueError("alpha must be nonzero for the displaced-parity optimizer")
    points = start_points(spec, cfg)
    outcomes = ordered_map(_local_search, [(spec, cfg, x0) for _, x0 in points], workers)

    traces = []
    best_value, best_x, best_conv = -math.inf, None, False
    for i, ((kind, x0), (start_value, (value, x, nit, conv))) in enumerate(zip(points, outcomes)):
        traces.append(StartTrace(i, kind, tuple(float(v) for v in x0), start_value, value, nit, conv))
        if value > best_value:
            best_value, best_x, best_conv = value, x, conv
    schedule_value = abs(DisplacedSignal(spec, cfg.convention).signed_flat(points[0][1]))
    return OptimizationResult(
        n=spec.n,
        alpha=alpha,
        best_value=best_value,
        best_assignment=DisplacementAssignment.from_flat(best_x),
        traces=tuple(traces),
        converged=best_conv,
        seed=cfg.seed,
        schedule_value=schedule_value,
    )
