"""Mermin-Klyshko operator expansion with exact coefficients.

``expand(n)`` runs the recursion

    O_k  = c [O_{k-1} (s_k + s_k') + O'_{k-1} (s_k - s_k')]
    O'_k = c [O'_{k-1} (s_k' + s_k) + O_{k-1} (s_k' - s_k)]

from O_1 = s_1, O'_1 = s_1', where c = 1/sqrt(2) under the ``"normalized"``
convention and c = 1 under ``"unnormalized"``.  Every coefficient produced
this way is an integer times a power of 1/sqrt(2), held exactly in
:class:`DyadicRootCoefficient` until the float boundary in
:func:`assign_angles`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Callable, Iterable, Sequence

import numpy as np

from .closed_form import DEFAULT_VARIANT, CatSpec, correlation_cat, correlation_mixture

CONVENTIONS = ("normalized", "unnormalized")
MAX_MODES = 8


class SettingChoice(enum.IntEnum):
    UNPRIMED = 0
    PRIMED = 1

    @property
    def label(self) -> str:
        return "unprimed" if self is SettingChoice.UNPRIMED else "primed"

    @classmethod
    def from_label(cls, label: str) -> "SettingChoice":
        try:
            return {"unprimed": cls.UNPRIMED, "primed": cls.PRIMED}[label]
        except KeyError:
            raise ValueError(f"unknown setting tag {label!r}") from None


@total_ordering
@dataclass(frozen=True)
class DyadicRootCoefficient:
    """Exact value ``m * 2**(-p/2)`` with integer ``m`` and ``p >= 0``.

    Canonical form: ``m`` is odd, or ``m == 0`` (then ``p == 0``), or ``p < 2``
    (``m`` cannot shed a factor of two without making ``p`` negative).
    """

    m: int
    p: int = 0

    def __post_init__(self):
        m, p = int(self.m), int(self.p)
        if p < 0:
            raise ValueError("p must be nonnegative")
        if m == 0:
            p = 0
        while m % 2 == 0 and m != 0 and p >= 2:
            m //= 2
            p -= 2
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", p)

    @classmethod
    def sqrt2_power(cls, k: int) -> "DyadicRootCoefficient":
        """Exact ``2**(k/2)``."""
        if k >= 0:
            return cls(2 ** ((k + 1) // 2), k % 2)
        return cls(1, -k)

    def _lifted(self, p: int) -> int:
        # m rescaled to a larger exponent p of the same parity
        return self.m * 2 ** ((p - self.p) // 2)

    def __add__(self, other):
        if isinstance(other, int):
            other = DyadicRootCoefficient(other)
        if not isinstance(other, DyadicRootCoefficient):
            return NotImplemented
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        if (self.p - other.p) % 2:
            raise ValueError(f"{self} + {other} is not of the form m*2^(-p/2)")
        p = max(self.p, other.p)
        return DyadicRootCoefficient(self._lifted(p) + other._lifted(p), p)

    __radd__ = __add__

    def __neg__(self):
        return DyadicRootCoefficient(-self.m, self.p)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return DyadicRootCoefficient(self.m * other, self.p)
        if isinstance(other, DyadicRootCoefficient):
            return DyadicRootCoefficient(self.m * other.m, self.p + other.p)
        return NotImplemented

    __rmul__ = __mul__

    def __abs__(self):
        return DyadicRootCoefficient(abs(self.m), self.p)

    def scale_inv_sqrt2(self) -> "DyadicRootCoefficient":
        return DyadicRootCoefficient(self.m, self.p + 1)

    def _signed_square(self) -> Fraction:
        return Fraction(self.m * abs(self.m), 2 ** self.p)

    def __lt__(self, other):
        if not isinstance(other, DyadicRootCoefficient):
            return NotImplemented
        return self._signed_square() < other._signed_square()

    def __float__(self):
        return self.m * 2.0 ** (-self.p / 2)

    def __bool__(self):
        return self.m != 0

    def __str__(self):
        if self.p == 0:
            return str(self.m)
        return f"{self.m}*2^(-{self.p}/2)"


@dataclass(frozen=True)
class MKExpansion:
    n: int
    terms: tuple[tuple[DyadicRootCoefficient, tuple[SettingChoice, ...]], ...]
    merged: bool = True
    convention: str = "normalized"

    def evaluate(self, values: Callable[[int, SettingChoice], object]):
        """Sum of coefficient * product of ``values(mode, tag)`` over terms."""
        total = 0
        for coeff, tags in self.terms:
            prod = 1
            for k, tag in enumerate(tags):
                prod = prod * values(k, tag)
            total = total + coeff * prod
        return total

    def tag_matrix(self) -> np.ndarray:
        return np.array([[int(t) for t in tags] for _, tags in self.terms], dtype=np.int8)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "convention": self.convention,
            "merged": self.merged,
            "terms": [
                {"coeff_m": c.m, "coeff_p": c.p, "tags": [t.label for t in tags]}
                for c, tags in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MKExpansion":
        terms = tuple(
            (DyadicRootCoefficient(t["coeff_m"], t["coeff_p"]),
             tuple(SettingChoice.from_label(s) for s in t["tags"]))
            for t in data["terms"]
        )
        return cls(int(data["n"]), terms, bool(data.get("merged", True)),
                   data.get("convention", "normalized"))


def _check_n(n: int, cap: int | None = None) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if cap is not None and n > cap:
        raise ValueError(f"n={n} exceeds the supported maximum {cap}")


def _accumulate(target: dict, tags: tuple, coeff: DyadicRootCoefficient) -> None:
    target[tags] = target.get(tags, DyadicRootCoefficient(0)) + coeff


@lru_cache(maxsize=None)
def expand_pair(n: int, convention: str = "normalized") -> tuple[MKExpansion, MKExpansion]:
    """Merged expansions of O_n and its prime-swapped partner O'_n."""
    _check_n(n)
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    U, P = SettingChoice.UNPRIMED, SettingChoice.PRIMED
    one = DyadicRootCoefficient(1)
    cur = {(U,): one}
    cur_p = {(P,): one}
    for _ in range(1, n):
        nxt: dict = {}
        nxt_p: dict = {}
        for tags, c in cur.items():
            if convention == "normalized":
                c = c.scale_inv_sqrt2()
            _accumulate(nxt, tags + (U,), c)
            _accumulate(nxt, tags + (P,), c)
            _accumulate(nxt_p, tags + (P,), c)
            _accumulate(nxt_p, tags + (U,), -c)
        for tags, c in cur_p.items():
            if convention == "normalized":
                c = c.scale_inv_sqrt2()
            _accumulate(nxt, tags + (U,), c)
            _accumulate(nxt, tags + (P,), -c)
            _accumulate(nxt_p, tags + (P,), c)
            _accumulate(nxt_p, tags + (U,), c)
        cur = {t: c for t, c in nxt.items() if c}
        cur_p = {t: c for t, c in nxt_p.items() if c}

    def freeze(d):
        return MKExpansion(n, tuple((d[t], t) for t in sorted(d)), True, convention)

    return freeze(cur), freeze(cur_p)


def expand(n: int, convention: str = "normalized") -> MKExpansion:
    return expand_pair(n, convention)[0]


def lhv_bound(n: int) -> float:
    """Local-realist bound 2^((n-1)/2) on the normalized MK signal."""
    return 2.0 ** ((n - 1) / 2)


@dataclass(frozen=True)
class AngleAssignment:
    """Per-mode setting pairs (phi_k, phi_k') in radians."""

    pairs: tuple[tuple[float, float], ...]

    @classmethod
    def standard(cls, n: int) -> "AngleAssignment":
        q = math.pi / 4
        return cls(((0.0, math.pi / 2),) + ((-q, q),) * (n - 1))

    def __len__(self):
        return len(self.pairs)


def assign_angles(exp: MKExpansion, assign: AngleAssignment,
                  merge: bool = True) -> list[tuple[float, tuple[float, ...]]]:
    """Substitute angles for setting tags.

    With ``merge`` the angles of modes 2..n are sorted in each term and
    terms with equal tuples are combined exactly (correlations are symmetric
    in the modes); zero groups are dropped.
    """
    if len(assign) != exp.n:
        raise ValueError(f"assignment has {len(assign)} modes, expansion has {exp.n}")
    if not merge:
        return [(float(c), tuple(assign.pairs[k][t] for k, t in enumerate(tags)))
                for c, tags in exp.terms]
    groups: dict = {}
    for c, tags in exp.terms:
        angles = tuple(assign.pairs[k][t] for k, t in enumerate(tags))
        key = (angles[0],) + tuple(sorted(angles[1:]))
        _accumulate(groups, key, c)
    return [(float(groups[k]), k) for k in sorted(groups) if groups[k]]


@lru_cache(maxsize=None)
def standard_terms(n: int) -> tuple[tuple[float, tuple[float, ...]], ...]:
    _check_n(n, MAX_MODES)
    return tuple(assign_angles(expand(n), AngleAssignment.standard(n)))


def mk_value(n: int, correlation: Callable[[Sequence[float]], float]) -> float:
    """Signed sum of coefficient * correlation over the standard grouped terms."""
    return math.fsum(c * correlation(angles) for c, angles in standard_terms(n))


def mk_signal_rotated(spec: CatSpec, variant: str = DEFAULT_VARIANT) -> float:
    return abs(mk_value(spec.n, lambda a: correlation_cat(spec, a, variant)))


def mk_signal_mixture(spec: CatSpec, variant: str = DEFAULT_VARIANT) -> float:
    return abs(mk_value(spec.n, lambda a: correlation_mixture(spec, a, variant)))


def rescaled_signal(spec: CatSpec, variant: str = DEFAULT_VARIANT) -> float:
    return mk_signal_rotated(spec, variant) / lhv_bound(spec.n)


def _assignment_table(n: int) -> np.ndarray:
    """All 4^n deterministic +-1 assignments, shape (4^n, n, 2)."""
    idx = np.arange(4 ** n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(2 * n)) & 1
    return (1 - 2 * bits).astype(np.int8).reshape(-1, n, 2)


def deterministic_values(exp: MKExpansion) -> set[DyadicRootCoefficient]:
    """Exact set of expansion values over every deterministic assignment."""
    _check_n(exp.n, MAX_MODES)
    ps = {c.p for c, _ in exp.terms}
    p = max(ps)
    if len({q % 2 for q in ps}) > 1:
        raise ValueError("expansion coefficients do not share a common root parity")
    coeffs = np.array([c._lifted(p) for c, _ in exp.terms], dtype=np.int64)
    table = _assignment_table(exp.n)
    tags = exp.tag_matrix()
    modes = np.arange(exp.n)
    totals = np.zeros(table.shape[0], dtype=np.int64)
    for coeff, row in zip(coeffs, tags):
        totals += coeff * table[:, modes, row].prod(axis=1, dtype=np.int64)
    return {DyadicRootCoefficient(int(v), p) for v in np.unique(totals)}


def lhv_bound_check(exp: MKExpansion) -> DyadicRootCoefficient:
    """Exact maximum of |O_n| over all deterministic local assignments."""
    return max(abs(v) for v in deterministic_values(exp))


def ghz_limit_value(n: int, terms: Iterable[tuple[float, Sequence[float]]] | None = None) -> float:
    from .closed_form import ghz_limit_correlation

    terms = standard_terms(n) if terms is None else terms
    return math.fsum(c * ghz_limit_correlation(a) for c, a in terms)
