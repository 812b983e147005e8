"""Displaced-parity (joint Wigner) Mermin-Klyshko signals in closed form.

Uses P(beta) = D^dag(beta) P D(beta).  Between coherent states,

    D(beta)|delta> = exp((beta delta^* - beta^* delta)/2) |delta + beta>,
    P|u> = |-u>,
    <u|v> = exp(-|u|^2/2 - |v|^2/2 + u^* v),

so every matrix element needed on the cat state is an elementary function
and the signal costs O(2^n) operations per evaluation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .closed_form import CatSpec
from .expansion import expand


def coherent_displaced_parity_element(gamma: complex, delta: complex, beta: complex) -> complex:
    """<gamma| D^dag(beta) P D(beta) |delta> for coherent states gamma, delta."""
    gamma, delta, beta = complex(gamma), complex(delta), complex(beta)
    u = gamma + beta
    v = -(delta + beta)
    phase = (beta.conjugate() * gamma - beta * gamma.conjugate()
             + beta * delta.conjugate() - beta.conjugate() * delta) / 2
    return np.exp(phase - abs(u) ** 2 / 2 - abs(v) ** 2 / 2 + u.conjugate() * v)


def _branch_elements(alpha: complex, betas: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized <a|P(b)|a>, <-a|P(b)|-a>, <a|P(b)|-a> over an array of b."""
    b = np.asarray(betas, dtype=complex)
    a = complex(alpha)
    ac = a.conjugate()
    bc = b.conj()
    # <g|P(b)|g> = exp(-2|g + b|^2)
    pp = np.exp(-2.0 * np.abs(a + b) ** 2)
    mm = np.exp(-2.0 * np.abs(-a + b) ** 2)
    u = a + b
    v = a - b
    phase = (bc * a - b * ac - b * ac + bc * a) / 2
    pm = np.exp(phase - np.abs(u) ** 2 / 2 - np.abs(v) ** 2 / 2 + u.conj() * v)
    return pp, mm, pm


@dataclass(frozen=True)
class DisplacementAssignment:
    """Per-mode displacement pairs (beta_k, beta_k')."""

    pairs: tuple[tuple[complex, complex], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs",
                           tuple((complex(b), complex(bp)) for b, bp in self.pairs))

    def __len__(self):
        return len(self.pairs)

    def as_array(self) -> np.ndarray:
        return np.array(self.pairs, dtype=complex).reshape(len(self.pairs), 2)

    def to_flat(self) -> np.ndarray:
        """[Re b1, Im b1, Re b1', Im b1', Re b2, ...]."""
        arr = self.as_array().reshape(-1)
        return np.column_stack([arr.real, arr.imag]).reshape(-1)

    @classmethod
    def from_flat(cls, params: Sequence[float]) -> "DisplacementAssignment":
        p = np.asarray(params, dtype=float)
        if p.ndim != 1 or p.size % 4:
            raise ValueError(f"flat displacement vector must have length 4n, got {p.size}")
        z = (p[0::2] + 1j * p[1::2]).reshape(-1, 2)
        return cls(tuple((complex(b), complex(bp)) for b, bp in z))

    def swap_modes(self, i: int, j: int) -> "DisplacementAssignment":
        pairs = list(self.pairs)
        pairs[i], pairs[j] = pairs[j], pairs[i]
        return DisplacementAssignment(tuple(pairs))

    def to_json(self) -> list:
        return [[z.real, z.imag] for pair in self.pairs for z in pair]

    @classmethod
    def from_json(cls, data: list) -> "DisplacementAssignment":
        if not isinstance(data, list) or len(data) % 2 or not data:
            raise ValueError("assignment must be a non-empty JSON array with an even number of [re, im] pairs")
        z = []
        for item in data:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise ValueError(f"malformed [re, im] entry: {item!r}")
            z.append(complex(float(item[0]), float(item[1])))
        return cls(tuple((z[i], z[i + 1]) for i in range(0, len(z), 2)))

    @classmethod
    def load(cls, path: str | Path) -> "DisplacementAssignment":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def correlation_displaced(spec: CatSpec, betas: Sequence[complex]) -> float:
    """<P(beta_1) ... P(beta_n)> on the cat state."""
    if len(betas) != spec.n:
        raise ValueError(f"expected {spec.n} displacements, got {len(betas)}")
    pp, mm, pm = _branch_elements(spec.alpha, np.asarray(betas, dtype=complex))
    norm2 = 1.0 / (2.0 + 2.0 * math.exp(-2.0 * spec.n * abs(spec.alpha) ** 2))
    return float(norm2 * (pp.prod() + mm.prod() + 2.0 * pm.prod().real))


def paper_beta_schedule(alpha: float, n: int) -> DisplacementAssignment:
    """beta_1 = 0, beta_1' = i pi/(8 alpha), beta_k = -+ i pi/(16 alpha) for k > 1."""
    alpha = float(abs(alpha))
    if alpha == 0.0:
        raise ValueError("the displacement schedule is undefined at alpha = 0")
    if n < 2:
        raise ValueError("n must be >= 2")
    first = (0j, 1j * math.pi / (8 * alpha))
    rest = (-1j * math.pi / (16 * alpha), 1j * math.pi / (16 * alpha))
    return DisplacementAssignment((first,) + (rest,) * (n - 1))


class DisplacedSignal:
    """Fast signed MK sum for a fixed (n, alpha); reused by the optimizer."""

    def __init__(self, spec: CatSpec, convention: str = "normalized"):
        self.spec = spec
        exp = expand(spec.n, convention)
        self.coeffs = np.array([float(c) for c, _ in exp.terms])
        self.tags = exp.tag_matrix().astype(np.intp)
        self.modes = np.arange(spec.n)
        self.norm2 = 1.0 / (2.0 + 2.0 * math.exp(-2.0 * spec.n * abs(spec.alpha) ** 2))

    def signed(self, betas: np.ndarray) -> float:
        """``betas`` has shape (n, 2): column 0 unprimed, column 1 primed."""
        pp, mm, pm = _branch_elements(self.spec.alpha, betas)
        sel = (self.modes, self.tags)
        corr = self.norm2 * (pp[sel].prod(axis=1) + mm[sel].prod(axis=1)
                             + 2.0 * pm[sel].prod(axis=1).real)
        return float(self.coeffs @ corr)

    def signed_flat(self, params: np.ndarray) -> float:
        p = np.asarray(params, dtype=float)
        if p.shape != (4 * self.spec.n,):
            raise ValueError(f"expected {4 * self.spec.n} parameters, got {p.size}")
        return self.signed((p[0::2] + 1j * p[1::2]).reshape(-1, 2))


def mk_signal_displaced(spec: CatSpec, assign: DisplacementAssignment,
                        convention: str = "normalized") -> float:
    if len(assign) != spec.n:
        raise ValueError(f"assignment has {len(assign)} modes, state has {spec.n}")
    return abs(DisplacedSignal(spec, convention).signed(assign.as_array()))


def mk_signal_displaced_terms(spec: CatSpec, assign: DisplacementAssignment,
                              convention: str = "normalized") -> float:
    """Term-by-term evaluation through :func:`correlation_displaced` (reference path)."""
    if len(assign) != spec.n:
        raise ValueError(f"assignment has {len(assign)} modes, state has {spec.n}")
    total = 0.0
    for c, tags in expand(spec.n, convention).terms:
        betas = [assign.pairs[k][t] for k, t in enumerate(tags)]
        total += float(c) * correlation_displaced(spec, betas)
    return abs(total)
