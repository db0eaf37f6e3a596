from math import gcd, pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dehncan.farey import Slope
from dehncan.volume import tet_volume
from dehncan.whitehead import (EXCEPTIONAL, FillingSlope, GateError,
                               certify_boundary_faces, even_core_faces, evaluate,
                               gate, odd_boundary_face, setup, solve,
                               unfilled_volume)
from dehncan.whitehead import odd_boundary_zeta

from helpers import quad_lobachevsky

ZERO, ONE, INF = Slope(0, 1), Slope(1, 1), Slope(1, 0)
# 8 Lambda(pi/4) from the quadrature oracle
UNFILLED = 3.6638623767088774


@pytest.fixture(scope="module")
def results():
    cache = {}

    def get(k, l):  # noqa: E741
        if (k, l) not in cache:
            cache[(k, l)] = solve((k, l))
        return cache[(k, l)]
    return get


class TestGate:
    def test_exceptional(self):
        assert not gate((1, 2))
        assert not gate((0, 1))
        assert gate((11, 8))

    def test_exactly_the_list(self):
        bad = set()
        for k in range(-8, 9):
            for l in range(-8, 9):  # noqa: E741
                if (k, l) == (0, 0) or gcd(abs(k), abs(l)) != 1:
                    continue
                if not gate((k, l)):
                    bad.add((k, l))
        want = EXCEPTIONAL | {(-k, -l) for k, l in EXCEPTIONAL}
        assert bad == want
        assert len(want) == 12

    def test_slope_canonical_sign(self):
        assert FillingSlope(-3, -2) == FillingSlope(3, 2)
        assert (FillingSlope(0, -1).k, FillingSlope(0, -1).l) == (0, 1)
        with pytest.raises(ValueError):
            FillingSlope(4, 6)
        with pytest.raises(ValueError):
            FillingSlope(0, 0)

    def test_setup_rejects(self):
        with pytest.raises(GateError):
            setup((1, -2))
        with pytest.raises(GateError):
            solve((1, 1))


class TestSetup:
    def test_odd_example(self):
        S = setup((2, 1))
        assert S.parity == "odd"
        assert S.m == Slope(1, 4)
        assert S.pqr == (ZERO, ONE, INF)

    def test_even_example(self):
        S = setup((11, 8))
        assert S.parity == "even"
        assert S.m == Slope(4, 11)
        assert S.pqr == (ZERO, ONE, INF)

    def test_even_extra_row(self):
        S = setup((1, 4))
        assert S.m == Slope(2, 1)
        assert S.pqr == (INF, ONE, ZERO)

    def test_theta_range(self):
        for s in [(2, 1), (3, 1), (1, 5), (5, 3)]:
            S = setup(s)
            lo, hi = S.theta_range
            assert lo == 0 and 0 < hi <= pi
            assert lo < S.theta_mid < hi
        assert setup((11, 8)).theta_range == (0.0, pi)

    def test_unfilled_volume(self):
        assert 8 * quad_lobachevsky(pi / 4) == pytest.approx(UNFILLED, abs=1e-12)
        assert unfilled_volume() == pytest.approx(UNFILLED, abs=1e-12)
        assert unfilled_volume() == pytest.approx(4 * tet_volume(pi / 2, pi / 4, pi / 4))


class TestSolve:
    def test_odd_pipeline(self, results):
        r = results(3, 1)
        assert r.setup.parity == "odd"
        assert r.canonical
        assert r.grad_norm <= 1e-10
        assert 0 < r.theta < pi
        assert r.volume < UNFILLED
        assert max(r.holonomy.values()) < 1e-8

    def test_even_pipeline(self, results):
        r = results(11, 8)
        S = r.setup
        assert S.parity == "even"
        assert r.canonical
        assert 0 < r.theta < pi
        # one triple per pair plus Delta_{N+1}
        assert r.angles.shape == (S.path.N + 1, 3)
        # the layers flatten quickly toward the core
        mins = r.angles[:S.path.N].min(axis=1)
        assert mins[-1] < 0.05 * mins[0]
        assert np.all(r.angles > 0)

    def test_even_volume_counts_pairs_twice(self, results):
        r = results(11, 8)
        N = r.setup.path.N
        v = 2 * sum(tet_volume(*t) for t in r.angles[:N]) + tet_volume(*r.angles[N])
        assert r.volume == pytest.approx(v, abs=1e-12)

    @pytest.mark.parametrize("s", [(3, 1), (2, 3), (5, 2), (11, 8), (4, 7), (6, -5)])
    def test_mirror_symmetry(self, s, results):
        k, l = s  # noqa: E741
        a, b = results(k, l), results(k, -l)
        assert a.volume == pytest.approx(b.volume, abs=1e-9)
        assert a.canonical and b.canonical

    def test_one_l_convergence(self, results):
        vols = [results(1, l).volume for l in range(3, 42, 2)]  # noqa: E741
        assert all(b > a for a, b in zip(vols, vols[1:]))
        assert vols[-1] < UNFILLED
        assert (UNFILLED - vols[-1]) / UNFILLED < 0.02

    def test_long_even(self, results):
        r = results(1, 40)
        assert r.dps == 50
        assert r.canonical
        assert r.margin_floor < 1e-30

    def test_theta_interior(self, results):
        for s in [(2, 1), (3, 2), (1, 6), (5, 4), (6, 1)]:
            r = results(*s)
            lo, hi = r.setup.theta_range
            assert lo < r.theta < hi
            assert r.theta < pi


class TestBoundaryFaces:
    def test_odd_closed_form(self, results):
        r = results(3, 1)
        zeta, square = odd_boundary_zeta(r.development.layers[0], r.setup.path.r,
                                         (Slope(1, 1), Slope(-1, 1)))
        assert square < 1e-10
        f = odd_boundary_face(zeta)
        a = abs(zeta)
        assert f.alpha == pytest.approx(1 / a) and f.gamma == pytest.approx(1 / a)
        assert f.beta == pytest.approx((abs(zeta + 1) ** 2 - 1) / a**2)
        assert f.margin == pytest.approx((abs(zeta + 1) ** 2 - (a - 1) ** 2) / a**2)
        assert f.margin > 0
        assert abs(f.margin - f.margin_dense) < 1e-9
        assert 0 < f.lam < 1

    @given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
    def test_odd_formula_random(self, zeta):
        if abs(zeta.imag) < 1e-2 or abs(zeta) < 1e-1:
            return
        f = odd_boundary_face(zeta)
        assert f.margin > 0
        assert abs(f.margin - f.margin_dense) < 1e-8 * max(1.0, abs(f.beta))

    def test_even_closed_form(self, results):
        r = results(11, 8)
        faces = {f.face_id: f for f in r.boundary_faces}
        f0 = faces["extra-0"]
        assert f0.gamma == 0.0
        assert f0.margin > 0
        assert abs(f0.margin - f0.margin_dense) < 1e-9
        # all three faces of Delta_{N+1} agree by symmetry
        assert faces["extra-1"].margin == pytest.approx(f0.margin, abs=1e-9)
        assert faces["extra-2"].margin == pytest.approx(f0.margin, abs=1e-9)

    @given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
    def test_even_formula_random(self, zeta):
        if abs(zeta.imag) < 1e-2:
            return
        f0 = even_core_faces(zeta, zeta + 1j)[0]
        d = abs(zeta - 1)
        assert f0.alpha == pytest.approx(1 / d)
        assert f0.beta == pytest.approx(abs(zeta) / d)
        assert f0.gamma == 0.0
        assert f0.margin == pytest.approx((abs(zeta) + 1) / d - 1)
        assert f0.margin > 0

    def test_recompute(self, results):
        for s in [(3, 1), (11, 8), (1, 41)]:
            r = results(*s)
            again = certify_boundary_faces(r)
            assert [f.margin for f in again] == pytest.approx(
                [f.margin for f in r.boundary_faces], abs=1e-14)


class TestEvaluate:
    def test_corrupted(self, results):
        r = results(5, 3)
        for i in range(2, len(r.z) - 1):
            z = list(r.z)
            z[i] += 0.05
            bad = evaluate(r.setup, z)
            assert not bad.canonical

    def test_roundtrip(self, results):
        r = results(11, 8)
        again = evaluate(r.setup, list(r.z))
        assert again.volume == pytest.approx(r.volume, abs=1e-14)
        assert again.min_margin == pytest.approx(r.min_margin, abs=1e-12)


class TestAveraging:
    @settings(max_examples=50)
    @given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(0.05, 1.0),
           st.floats(0.05, 1.0))
    def test_average_does_not_lose_volume(self, s1, t1, s2, t2):
        # the volume functional is concave on each tetrahedron, so replacing
        # a pair of triples by their average can only increase the total
        def triple(s, t):
            x = (pi - 0.01) * s
            y = (pi - x) * t * 0.99
            return np.array([x, y, pi - x - y])
        a, b = triple(s1, t1), triple(s2, t2)
        if min(a.min(), b.min()) <= 0:
            return
        m = (a + b) / 2
        assert tet_volume(*a) + tet_volume(*b) <= 2 * tet_volume(*m) + 1e-13
