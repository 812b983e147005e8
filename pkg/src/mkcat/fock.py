"""Truncated Fock-space oracle.

Every single-mode operator is a dense ``dim x dim`` matrix; nothing here
uses the closed-form correlation functions.  Multi-mode expectations on the
cat state are factorized over the two coherent branches, so no ``dim**n``
vector is needed except in :func:`full_tensor_expectation`, which exists to
cross-check that factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg

from .closed_form import CatSpec
from .errors import TruncationError

DEFAULT_DIM = 64
TAIL_TOL = 1e-12
HERMITIAN_TOL = 1e-8
UNITARY_TOL = 1e-8


def required_dim(amplitude: float) -> int:
    """Tail-mass heuristic ceil(a^2 + 8a + 16) for the largest amplitude ``a``."""
    a = abs(amplitude)
    return int(math.ceil(a * a + 8.0 * a + 16.0))


@dataclass(frozen=True)
class Truncation:
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"truncation dim must be an integer >= 2, got {self.dim!r}")

    def require(self, amplitude: float, what: str = "amplitude") -> None:
        need = required_dim(amplitude)
        if self.dim < need:
            raise TruncationError(
                f"dim={self.dim} is too small for {what} |{abs(amplitude):.6g}|; need dim >= {need}",
                need,
            )


def _as_truncation(t) -> Truncation:
    if t is None:
        return Truncation()
    if isinstance(t, Truncation):
        return t
    return Truncation(int(t))


def coherent_vector(alpha: complex, t: Truncation | int | None = None) -> np.ndarray:
    t = _as_truncation(t)
    alpha = complex(alpha)
    c = np.empty(t.dim, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for m in range(1, t.dim):
        c[m] = c[m - 1] * alpha / math.sqrt(m)
    tail = 1.0 - float(np.vdot(c, c).real)
    if tail > TAIL_TOL:
        raise TruncationError(
            f"coherent state |{abs(alpha):.6g}| loses {tail:.3g} norm beyond dim={t.dim}",
            max(required_dim(alpha), t.dim + 1),
        )
    return c


def annihilation_matrix(t: Truncation | int | None = None) -> np.ndarray:
    t = _as_truncation(t)
    return np.diag(np.sqrt(np.arange(1, t.dim, dtype=float)), 1).astype(complex)


@lru_cache(maxsize=512)
def _displacement(beta: complex, dim: int) -> np.ndarray:
    a = annihilation_matrix(dim)
    mat = scipy.linalg.expm(beta * a.conj().T - np.conj(beta) * a)
    half = dim // 2 + 1
    low = mat[:, :half]
    if np.abs(low.conj().T @ low - np.eye(half)).max() > UNITARY_TOL:
        raise TruncationError(f"displacement by |{abs(beta):.6g}| is not unitary at dim={dim}",
                              required_dim(2 * abs(beta)))
    mat.setflags(write=False)
    return mat


def displacement_matrix(beta: complex, t: Truncation | int | None = None) -> np.ndarray:
    """D(beta) = exp(beta a^dag - beta^* a) on the truncated space."""
    t = _as_truncation(t)
    t.require(beta, "displacement")
    return _displacement(complex(beta), t.dim)


def parity_matrix(t: Truncation | int | None = None) -> np.ndarray:
    t = _as_truncation(t)
    return np.diag((-1.0) ** np.arange(t.dim)).astype(complex)


def phase_gate_matrix(phi: float, t: Truncation | int | None = None) -> np.ndarray:
    """Vacuum phase gate: e^{i phi} on |0>, identity elsewhere."""
    t = _as_truncation(t)
    g = np.eye(t.dim, dtype=complex)
    g[0, 0] = complex(math.cos(phi), math.sin(phi))
    return g


def rotation_matrix(alpha: complex, phi: float, t: Truncation | int | None = None) -> np.ndarray:
    """Effective cat-qubit z rotation R(phi) = D^dag(alpha) G(phi) D(alpha)."""
    t = _as_truncation(t)
    t.require(2 * abs(alpha), "rotated parity (2 alpha)")
    d = displacement_matrix(alpha, t)
    return d.conj().T @ phase_gate_matrix(phi, t) @ d


def rotated_parity_matrix(alpha: complex, phi: float, t: Truncation | int | None = None) -> np.ndarray:
    t = _as_truncation(t)
    r = rotation_matrix(alpha, phi, t)
    return r @ parity_matrix(t) @ r.conj().T


def displaced_parity_matrix(beta: complex, t: Truncation | int | None = None) -> np.ndarray:
    """P(beta) = D^dag(beta) P D(beta)."""
    t = _as_truncation(t)
    d = displacement_matrix(beta, t)
    return d.conj().T @ parity_matrix(t) @ d


def _check_hermitian(ops: Sequence[np.ndarray]) -> None:
    for k, m in enumerate(ops):
        resid = np.abs(m - m.conj().T).max()
        if resid > HERMITIAN_TOL:
            raise ValueError(f"operator for mode {k + 1} is not Hermitian (residual {resid:.3g})")


def branch_expectation(spec: CatSpec, ops: Sequence[np.ndarray]) -> float:
    """<psi| M_1 x ... x M_n |psi> on the n-mode cat state, one operator per mode."""
    if len(ops) != spec.n:
        raise ValueError(f"expected {spec.n} operators, got {len(ops)}")
    _check_hermitian(ops)
    dim = ops[0].shape[0]
    plus = coherent_vector(spec.alpha, dim)
    minus = coherent_vector(-spec.alpha, dim)
    pp = mm = pm = 1.0 + 0.0j
    for m in ops:
        pp *= np.vdot(plus, m @ plus)
        mm *= np.vdot(minus, m @ minus)
        pm *= np.vdot(plus, m @ minus)
    norm = 2.0 + 2.0 * np.vdot(plus, minus) ** spec.n
    total = (pp + mm + 2.0 * pm.real) / norm.real
    if abs(total.imag) > 1e-10:
        raise ArithmeticError(f"expectation has imaginary residue {total.imag:.3g}")
    return float(total.real)


MAX_TENSOR_ENTRIES = 2 ** 21


def full_tensor_expectation(spec: CatSpec, ops: Sequence[np.ndarray],
                            t: Truncation | int | None = None) -> float:
    """Same expectation from the explicit ``dim**n`` state vector (n <= 3)."""
    t = _as_truncation(t)
    if spec.n > 3 or t.dim ** spec.n > MAX_TENSOR_ENTRIES:
        raise ValueError(f"full tensor of dim={t.dim}, n={spec.n} exceeds the size guard")
    if len(ops) != spec.n:
        raise ValueError(f"expected {spec.n} operators, got {len(ops)}")
    plus = coherent_vector(spec.alpha, t)
    minus = coherent_vector(-spec.alpha, t)
    psi = _kron_all([plus] * spec.n) + _kron_all([minus] * spec.n)
    psi = psi / np.linalg.norm(psi)
    phi = psi.reshape((t.dim,) * spec.n)
    for k, m in enumerate(ops):
        phi = np.moveaxis(np.tensordot(m, phi, axes=([1], [k])), 0, k)
    return float(np.vdot(psi, phi.reshape(-1)).real)


def _kron_all(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.kron(out, v)
    return out


def oracle_correlation_rotated(spec: CatSpec, angles: Sequence[float],
                               t: Truncation | int | None = None) -> float:
    t = _as_truncation(t)
    if len(angles) != spec.n:
        raise ValueError(f"expected {spec.n} angles, got {len(angles)}")
    ops = [rotated_parity_matrix(spec.alpha, phi, t) for phi in angles]
    return branch_expectation(spec, ops)


def oracle_correlation_mixture(spec: CatSpec, angles: Sequence[float],
                               t: Truncation | int | None = None) -> float:
    t = _as_truncation(t)
    if len(angles) != spec.n:
        raise ValueError(f"expected {spec.n} angles, got {len(angles)}")
    plus = coherent_vector(spec.alpha, t)
    minus = coherent_vector(-spec.alpha, t)
    pp = mm = 1.0 + 0.0j
    for phi in angles:
        m = rotated_parity_matrix(spec.alpha, phi, t)
        pp *= np.vdot(plus, m @ plus)
        mm *= np.vdot(minus, m @ minus)
    return float(0.5 * (pp + mm).real)


def oracle_correlation_displaced(spec: CatSpec, betas: Sequence[complex],
                                 t: Truncation | int | None = None) -> float:
    t = _as_truncation(t)
    if len(betas) != spec.n:
        raise ValueError(f"expected {spec.n} displacements, got {len(betas)}")
    t.require(abs(spec.alpha) + max(abs(b) for b in betas), "displaced branch")
    ops = [displaced_parity_matrix(b, t) for b in betas]
    return branch_expectation(spec, ops)
