"""Acceptance criteria, one PASS/FAIL line each, at their stated tolerances.

Run ``pytest -s tests/test_acceptance.py`` to see the lines inline; they are also
collected into the "acceptance criteria" section of the terminal summary.
"""

import csv
import itertools
import math

import numpy as np
import pytest

from mkcat.cli import run
from mkcat.closed_form import CatSpec, correlation_cat, ghz_limit_correlation
from mkcat.displaced import coherent_displaced_parity_element, mk_signal_displaced, paper_beta_schedule
from mkcat.expansion import (
    AngleAssignment,
    DyadicRootCoefficient,
    assign_angles,
    expand,
    ghz_limit_value,
    lhv_bound_check,
    standard_terms,
)
from mkcat.fock import (
    coherent_vector,
    displaced_parity_matrix,
    oracle_correlation_rotated,
    rotated_parity_matrix,
)
from mkcat.optimizer import OptimizerConfig, maximize_displaced_signal
from mkcat.report import optimized_equivalence, thresholds

Q = math.pi / 4
ALPHAS = [0.25 * k for k in range(9)]


# 1. Quoted numbers for the rotated formalism ---------------------------------

@pytest.fixture(scope="module")
def rotated_numbers():
    # The optimizer-dependent entries are covered by criteria 2 and 4.
    skip = {"alpha": 1.0, "mean_quanta_ratio": 15.0}
    return thresholds(cfg=OptimizerConfig(starts=1, max_iters=50), equivalence=skip)


ROTATED_KEYS = [
    "S3_at_alpha_1", "S3_cross_classical", "S3_cross_genuine", "S3_at_alpha_0", "S3_dip_min_value",
    "R4_cross_classical", "R4_cross_genuine", "R4_at_alpha_1",
    "R5_cross_classical", "R5_cross_genuine", "R5_at_alpha_1",
]


@pytest.mark.parametrize("key", ROTATED_KEYS)
def test_c1_quoted_numbers(criterion, rotated_numbers, key):
    e = rotated_numbers[key]
    criterion(f"C1 {key}", e["pass"], f"expected {e['expected']} computed {e['computed']:.6f} tol {e['tolerance']}")


def test_c1_dip_lies_before_classical_crossing(criterion, rotated_numbers):
    a = rotated_numbers["S3_dip_argmin"]["computed"]
    cross = rotated_numbers["S3_cross_classical"]["computed"]
    criterion("C1 S3 minimum lies on (0, 0.36)", 0 < a < min(0.36, cross), f"argmin {a:.5f}")


# 2. Size comparison via the optimized displaced signal -----------------------

@pytest.mark.slow
def test_c2_size_comparison(criterion):
    eq = optimized_equivalence(cfg=OptimizerConfig())
    alpha, ratio = eq["alpha"], eq["mean_quanta_ratio"]
    ok_alpha = abs(alpha - 3.824) <= 0.05
    ok_ratio = abs(ratio - 15.0) <= 0.5
    detail = f"alpha {alpha:.4f} (3.824 +- 0.05), ratio {ratio:.3f} (15 +- 0.5)"
    criterion("C2 optimized displaced S3 reaches 3.916 at alpha 3.824, ratio 15", ok_alpha and ok_ratio, detail)


# 3. Schedule-displaced signal approaches the quantum maximum -----------------

def test_c3_asymptotic_maximality(criterion):
    values = [mk_signal_displaced(CatSpec(3, a), paper_beta_schedule(a, 3)) for a in (1, 2, 4, 8)]
    ok = values[-1] >= 3.95 and all(b > a for a, b in zip(values, values[1:]))
    criterion("C3 schedule S3 >= 3.95 at alpha 8 and increasing on {1,2,4,8}", ok,
              ", ".join(f"{v:.5f}" for v in values))


# 4. Optimizer floor ----------------------------------------------------------

def test_c4_optimizer_floor(criterion):
    best = maximize_displaced_signal(CatSpec(3, 1.0), OptimizerConfig()).best_value
    criterion("C4 optimized displaced S3 at alpha 1 >= 2.5", best >= 2.5, f"{best:.5f}")


# 5. Closed form against the Fock oracle --------------------------------------

def test_c5_rotated_closed_form_vs_oracle(criterion):
    worst, where = 0.0, None
    for n in (3, 4, 5):
        for a in ALPHAS:
            spec = CatSpec(n, a)
            for _, angles in standard_terms(n):
                d = abs(correlation_cat(spec, angles) - oracle_correlation_rotated(spec, angles, 64))
                if d > worst:
                    worst, where = d, (n, a, tuple(round(x / Q) for x in angles))
    criterion("C5 rotated correlations closed form vs oracle < 1e-8", worst < 1e-8,
              f"max deviation {worst:.3e} at n, alpha, angles/(pi/4) = {where}")


def test_c5_displaced_elements_vs_oracle(criterion):
    grid = [0, 0.5, -0.5, 1, -1, 1j, -1j]
    worst = 0.0
    for b in grid:
        m = displaced_parity_matrix(b, 64)
        for g, d in itertools.product(grid, repeat=2):
            ref = np.vdot(coherent_vector(g), m @ coherent_vector(d))
            worst = max(worst, abs(coherent_displaced_parity_element(g, d, b) - ref))
    criterion("C5 displaced parity elements vs oracle < 1e-8", worst < 1e-8, f"max deviation {worst:.3e}")


# 6. Structural properties ----------------------------------------------------

def test_c6a_lhv_bound(criterion):
    got = {n: lhv_bound_check(expand(n)) for n in range(2, 6)}
    ok = all(v == DyadicRootCoefficient.sqrt2_power(n - 1) for n, v in got.items())
    criterion("C6a deterministic maximum equals 2^((n-1)/2) exactly, n = 2..5", ok,
              ", ".join(f"n={n}: {float(v):.6f}" for n, v in got.items()))


def _keyed(n, scale=1.0, merge=True):
    terms = assign_angles(expand(n), AngleAssignment.standard(n), merge=merge)
    if not merge:
        return {tuple(round(x / Q) for x in a): round(c * scale, 9) for c, a in terms}
    return {(round(a[0] / Q), tuple(sorted(round(x / Q) for x in a[1:]))): round(c * scale, 9) for c, a in terms}


def test_c6b_printed_coefficients(criterion):
    n3 = {(0, -1, 1): 1.0, (0, 1, -1): 1.0, (2, -1, -1): 1.0, (2, 1, 1): -1.0}
    n4 = {
        (0, (-1, -1, -1)): -1, (0, (-1, -1, 1)): 3, (0, (-1, 1, 1)): 3, (0, (1, 1, 1)): -1,
        (2, (1, 1, 1)): -1, (2, (-1, 1, 1)): -3, (2, (-1, -1, 1)): 3, (2, (-1, -1, -1)): 1,
    }
    n5 = {
        (0, (-1, -1, -1, -1)): -1, (0, (-1, -1, 1, 1)): 6, (0, (1, 1, 1, 1)): -1,
        (2, (-1, 1, 1, 1)): -4, (2, (-1, -1, -1, 1)): 4,
    }
    ok = _keyed(3, merge=False) == n3 and _keyed(4, math.sqrt(2)) == n4 and _keyed(5) == n5
    criterion("C6b expansion reproduces the reference n = 3, 4, 5 coefficients", ok)


def test_c6c_ghz_limit(criterion):
    got = {n: ghz_limit_value(n) for n in range(2, 9)}
    ok = all(abs(v - 2 ** (n - 1)) < 1e-12 for n, v in got.items())
    criterion("C6c GHZ-limit value equals 2^(n-1), n = 2..8", ok)


def test_c6d_phase_invariance(criterion):
    worst = 0.0
    for n in (3, 4, 5):
        for a in (0.3, 1.0, 1.7):
            for theta in (math.pi / 7, math.pi / 3):
                rotated = CatSpec(n, a * complex(math.cos(theta), math.sin(theta)))
                for _, angles in standard_terms(n):
                    worst = max(worst, abs(correlation_cat(rotated, angles) - correlation_cat(CatSpec(n, a), angles)))
    criterion("C6d rotated correlations invariant under alpha -> alpha e^(i theta)", worst < 1e-12,
              f"max deviation {worst:.3e}")


def test_c6e_involution_and_bounds(criterion):
    worst_sq = 0.0
    for a, phi in itertools.product((0.0, 0.5, 1.0, 2.0), (0.0, Q, -Q, math.pi / 2, 1.1)):
        s = rotated_parity_matrix(a, phi, 64)
        worst_sq = max(worst_sq, np.abs(s @ s - np.eye(64)).max())
    worst_e = 0.0
    for n in (3, 4, 5):
        for a in ALPHAS:
            for _, angles in standard_terms(n):
                worst_e = max(worst_e, abs(correlation_cat(CatSpec(n, a), angles)))
    ok = worst_sq < 1e-8 and worst_e <= 1 + 1e-12
    criterion("C6e sigma(phi)^2 = I and |E| <= 1", ok, f"max |s^2 - I| {worst_sq:.2e}, max |E| {worst_e:.6f}")


def test_c6f_truncation_doubling(criterion):
    worst = 0.0
    for n in (3, 4, 5):
        for a in (0.5, 1.0, 2.0):
            spec = CatSpec(n, a)
            for _, angles in standard_terms(n):
                worst = max(worst, abs(oracle_correlation_rotated(spec, angles, 64)
                                       - oracle_correlation_rotated(spec, angles, 128)))
    criterion("C6f oracle stable under truncation doubling < 1e-9", worst < 1e-9, f"max change {worst:.3e}")


# 7. Reproduction bundle ------------------------------------------------------

def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _curve(rows, formalism, n=None):
    return [(float(r["alpha"]), float(r["value"])) for r in rows
            if r["formalism"] == formalism and (n is None or int(r["n"]) == n)]


def test_c7_reproduction_bundle(criterion, tmp_path, capsys):
    argv = ["reproduce-all", "--starts", "2", "--max-iters", "200"]
    assert run(argv + ["--output-dir", str(tmp_path / "a")]) == 0
    assert run(argv + ["--output-dir", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    names = ["fig1a", "fig1b", "fig1c", "fig1d", "fig2", "fig3"]
    files = [f"{n}.csv" for n in names] + ["thresholds.json", "optimizer_report.json"]
    identical = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)

    fig1_ok = True
    for name in names[:4]:
        rows = _read(tmp_path / "a" / f"{name}.csv")
        cat, mix = _curve(rows, "rotated"), _curve(rows, "mixture")
        fig1_ok &= abs(mix[-1][1]) < 1e-3 and abs(abs(cat[-1][1]) - 1) < 1e-3
        fig1_ok &= abs(cat[0][1] - 1) < 1e-12

    fig2 = _curve(_read(tmp_path / "a" / "fig2.csv"), "rotated")
    dips = min(v for a, v in fig2 if 0 < a < 0.36) < 2
    rise = next(a for a, v in fig2 if a > 0.2 and v >= 2)
    fig2_ok = dips and abs(rise - 0.36) <= 0.01

    rows3 = _read(tmp_path / "a" / "fig3.csv")
    fig3_ok = all(any(v > 1 for a, v in _curve(rows3, "rotated", n) if 0 < a < 0.32) for n in (4, 5))
    fig3_ok &= len(_curve(rows3, "lhv-bound")) == 2 * 201

    ok = identical and fig1_ok and fig2_ok and fig3_ok
    criterion("C7 reproduce-all bundle matches the caption features and is byte-stable", ok,
              f"byte-identical {identical}, fig1 {fig1_ok}, fig2 {fig2_ok} (crosses 2 at {rise}), fig3 {fig3_ok}")
