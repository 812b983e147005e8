import csv
import io
import json
import math

import pytest

from mkcat.errors import EngineMismatchError, NoSignChangeError
from mkcat.expansion import lhv_bound
from mkcat.sweep import (
    CrossingQuery,
    EmitError,
    SweepRecord,
    alpha_grid,
    correlation_sweep,
    dip_extremum,
    emit,
    find_crossing,
    genuine_level,
    named_level,
    render,
    signal_function,
    sweep,
)

Q = math.pi / 4


def test_grid():
    g = alpha_grid(0, 2, 201)
    assert len(g) == 201 and g[1] == 0.01 and g[37] == 0.37 and g[-1] == 2.0


class TestSweep:
    def test_first_record(self):
        recs = sweep(3, "rotated", "closed-form", [0.0, 0.5, 1.0])
        assert recs[0].value == pytest.approx(2.0)
        assert recs[2].value == pytest.approx(3.916, abs=0.005)
        assert [r.alpha for r in recs] == [0.0, 0.5, 1.0]

    def test_correlations_start_at_one(self):
        recs = correlation_sweep(3, (0, -Q, Q), "rotated", "oracle", [0.0, 1.0])
        assert recs[0].value == pytest.approx(1.0)

    def test_mixture_small_at_two(self):
        recs = correlation_sweep(3, (0, -Q, Q), "mixture", "closed-form", [2.0])
        assert abs(recs[0].value) < 1e-3

    def test_engines_agree_exact_variant(self):
        grid = [0.0, 0.4, 1.0, 2.0]
        for n in (3, 4):
            a = sweep(n, "rotated", "closed-form", grid, variant="exact")
            b = sweep(n, "rotated", "oracle", grid)
            assert max(abs(x.value - y.value) for x, y in zip(a, b)) < 1e-8

    def test_displaced_engines_agree(self):
        grid = [0.5, 1.0, 2.0]
        a = sweep(3, "displaced", "closed-form", grid)
        b = sweep(3, "displaced", "oracle", grid)
        assert max(abs(x.value - y.value) for x, y in zip(a, b)) < 1e-8

    def test_both_flags_published_form(self):
        with pytest.raises(EngineMismatchError):
            sweep(3, "rotated", "both", [0.3])
        recs = sweep(3, "rotated", "both", [0.3, 1.0], variant="exact")
        assert all(r.engine == "closed-form" for r in recs)

    @pytest.mark.parametrize("grid", [[0.5, 0.4], [-0.1, 0.2], [], [0.1, 0.1]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            sweep(3, "rotated", "closed-form", grid)

    def test_displaced_needs_positive(self):
        with pytest.raises(ValueError):
            sweep(3, "displaced", "closed-form", [0.0, 1.0])

    def test_ranges(self):
        grid = alpha_grid(0, 2, 201)
        assert all(0 <= r.value <= 4 for r in sweep(3, "rotated", "closed-form", grid))
        assert all(0 <= r.value <= 2 * math.sqrt(2) + 1e-12 for r in sweep(4, "rotated", "closed-form", grid, rescaled=True))
        assert all(0 <= r.value <= 4 + 1e-12 for r in sweep(5, "rotated", "closed-form", grid, rescaled=True))

    def test_monotone_after_dip(self):
        vals = [r.value for r in sweep(3, "rotated", "closed-form", alpha_grid(0.4, 2.0, 161))]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestCrossing:
    def test_s3_classical(self):
        assert find_crossing(3, "rotated", CrossingQuery(2.0, (0.3, 0.5))) == pytest.approx(0.36, abs=0.005)

    def test_r4_classical(self):
        assert find_crossing(4, "rotated", CrossingQuery(2 * math.sqrt(2), (0.25, 0.4))) == pytest.approx(0.311, abs=0.005)

    def test_r5_genuine(self):
        level = 2 * math.sqrt(2) * lhv_bound(5)
        assert find_crossing(5, "rotated", CrossingQuery(level, (0.5, 0.8))) == pytest.approx(0.64, abs=0.01)

    def test_bracket_refinement(self):
        a = find_crossing(3, "rotated", CrossingQuery(2.0, (0.3, 0.5)))
        b = find_crossing(3, "rotated", CrossingQuery(2.0, (a - 0.02, a + 0.03)))
        assert abs(a - b) < 1e-4

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            find_crossing(3, "rotated", CrossingQuery(2.0, (0.6, 0.9)))

    def test_levels(self):
        assert named_level(3, "classical") == 2
        assert genuine_level(3) == pytest.approx(2 * math.sqrt(2))
        assert genuine_level(4) / lhv_bound(4) == pytest.approx(2)
        assert genuine_level(5) / lhv_bound(5) == pytest.approx(2 * math.sqrt(2))
        assert named_level(3, "1.5") == 1.5
        with pytest.raises(ValueError):
            named_level(3, "quantum")


def test_dip():
    alpha, value = dip_extremum(3)
    assert 0 < alpha < 0.36
    assert value < 2
    fn = signal_function(3)
    assert fn(alpha) <= min(fn(alpha - 0.01), fn(alpha + 0.01))


class TestEmit:
    def test_csv_contract(self, tmp_path):
        recs = [SweepRecord(0.1, 1 / 3, 3, "rotated", "closed-form"),
                SweepRecord(0.0, 2.0, 3, "rotated", "closed-form")]
        path = emit(recs, "csv", tmp_path / "a.csv")
        raw = path.read_bytes()
        assert raw.startswith(b"alpha,value,n,formalism,engine\r\n")
        rows = list(csv.DictReader(io.StringIO(raw.decode())))
        assert [float(r["alpha"]) for r in rows] == [0.0, 0.1]
        assert float(rows[1]["value"]) == 1 / 3  # shortest round-trip repr

    def test_json(self):
        data = json.loads(render([SweepRecord(0.5, 1.0, 4, "mixture", "oracle")], "json"))
        assert data == [{"alpha": 0.5, "value": 1.0, "n": 4, "formalism": "mixture", "engine": "oracle"}]

    def test_byte_stable(self, tmp_path):
        recs = sweep(3, "rotated", "closed-form", alpha_grid(0, 1, 11))
        a = emit(recs, "csv", tmp_path / "a.csv").read_bytes()
        b = emit(list(reversed(recs)), "csv", tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_io_error(self, tmp_path):
        with pytest.raises(EmitError, match="missing"):
            emit([], "csv", tmp_path / "missing" / "x.csv")

    def test_bad_tags(self):
        with pytest.raises(ValueError):
            SweepRecord(0.0, 1.0, 3, "wigner", "closed-form")
        with pytest.raises(ValueError):
            render([], "xml")
