import cmath
from math import pi, sin

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dehncan.angles import BoundaryAngles, tet_angles
from dehncan.canonical import solve_face
from dehncan.develop import (deck_map, develop_torus, edge_shape_residuals,
                             edge_vectors, handedness, holonomy_check,
                             horoball_vector, horoball_vectors, lorentz,
                             mobius_apply, tet_shape)
from dehncan.farey import farey_path, path_from_word
from dehncan.volume import maximize

from helpers import STD, random_instance


def interior_angles(pts):
    out = []
    n = len(pts)
    for k in range(n):
        a, b, c = pts[k - 1], pts[k], pts[(k + 1) % n]
        out.append(cmath.phase((a - b) / (c - b)) % (2 * pi))
    return out


def solved(seed, **kw):
    rng = np.random.default_rng(seed)
    p, q, r, m, path, b = random_instance(rng, **kw)
    res = maximize(path, b, precision="double")
    return path, b, res.z_star


class TestShape:
    def test_examples(self):
        assert tet_shape(pi / 3, pi / 3, pi / 3) == pytest.approx(cmath.exp(1j * pi / 3), abs=1e-15)
        assert tet_shape(pi / 2, pi / 4, pi / 4) == pytest.approx(1j, abs=1e-15)

    @given(st.floats(0.01, 0.98), st.floats(0.01, 0.98))
    def test_argument_and_modulus(self, s, t):
        x = pi * s
        y = (pi - x) * t
        w = pi - x - y
        if min(y, w) < 1e-3:
            return
        zz = tet_shape(x, y, w)
        assert cmath.phase(zz) == pytest.approx(x, abs=1e-12)
        assert abs(zz) == pytest.approx(sin(y) / sin(w), rel=1e-12)
        assert zz.imag > 0

    @given(st.floats(0.05, 0.9), st.floats(0.05, 0.9))
    def test_cyclic_identity(self, s, t):
        # z, 1/(1-z), 1-1/z are the shapes at the three edges
        x = pi * s
        y = (pi - x) * t
        w = pi - x - y
        if min(y, w) < 1e-2:
            return
        z1 = tet_shape(x, y, w)
        assert tet_shape(y, w, x) == pytest.approx(1 / (1 - z1), rel=1e-10)
        assert tet_shape(w, x, y) == pytest.approx(1 - 1 / z1, rel=1e-10)


class TestChain:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_layer_angles(self, seed):
        path, b, z = solved(seed, min_letters=2)
        dev = develop_torus(path, z)
        assert len(dev.layers) == path.N
        for L in dev.layers:
            i = L.index
            got = interior_angles(L.points)
            if L.kind == "collapsed":
                # straight and folded-back corners read as 0 or 2 pi
                got = [0.0 if g > 2 * pi - 1e-9 else g for g in got]
            else:
                assert sum(got) == pytest.approx(4 * pi, abs=1e-12)
            want = sorted([2 * pi - z[i], z[i + 1], z[i] - z[i + 1]] * 2)
            np.testing.assert_allclose(sorted(got), want, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_normalized_layers(self, seed):
        path, b, z = solved(seed, min_letters=2)
        dev = develop_torus(path, z)
        for L in dev.layers:
            v = L.vertices
            assert v[0] == -1 and v[3] == 1
            assert v[4] == -v[1] and v[5] == -v[2]
            (a, A), (bb, B), (c, C) = L.edges()
            total = a * cmath.exp(1j * A) + bb * cmath.exp(1j * B) + c * cmath.exp(1j * C)
            assert total == pytest.approx(2.0, abs=1e-12)
        last = dev.layers[-1]
        assert last.kind == "collapsed"
        assert last.zeta_p == pytest.approx(-1.0, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_interior_orientation_and_representatives(self, seed):
        path, b, z = solved(seed, min_letters=3)
        dev = develop_torus(path, z)
        for L in dev.layers[1:path.N - 1]:
            zeta, zeta_p = L.normalized()
            assert zeta_p.imag > zeta.imag
            (_, A), (_, B), (_, C) = L.edges()
            assert -pi < min(A, C) < 0 < B < pi
            assert B - pi < A < B and B - pi < C < B

    def test_consecutive_layers_share_vertices(self):
        path, b, z = solved(3, min_letters=4)
        dev = develop_torus(path, z)
        for i in range(path.N - 2):
            outer, inner = dev.layers[i], dev.layers[i + 1]
            mu = dev.scale[i]
            shared = 0
            for p in inner.points:
                if min(abs(mu * p - q) for q in outer.points) < 1e-9:
                    shared += 1
            assert shared == 4


class TestHoroballs:
    def test_rows(self):
        zeta, zeta_p = -0.3 - 0.4j, 0.2 - 0.1j
        (a, _), (b, _), (c, _) = edge_vectors(zeta, zeta_p)
        v = horoball_vectors(zeta, zeta_p)
        assert v["inf"] == pytest.approx([0, 0, -1, 1])
        assert v["-1"] == pytest.approx([-2 / (a * c), 0, 0, 2 / (a * c)])
        assert v["1"] == pytest.approx([2 / (a * c), 0, 0, 2 / (a * c)])

    @given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
           st.floats(1e-3, 1e3))
    def test_isotropic(self, u, d):
        v = horoball_vector(u, d)
        assert abs(lorentz(v, v)) <= 1e-12 * max(1.0, v[3] ** 2)
        assert v[3] > 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_diameter_law(self, seed):
        # the deck map at -1 sends the height-1 horoball at infinity to the
        # horoball at 1; for an SL2 matrix ((a, b), (c, d)) its image has
        # diameter 1 / |c|^2
        path, b, z = solved(seed, min_letters=3)
        dev = develop_torus(path, z)
        for L in dev.layers[1:path.N - 1]:
            zeta, zeta_p = L.normalized()
            G = deck_map(-1.0 + 0j, zeta, zeta_p)
            (ea, _), _, (ec, _) = L.edges()
            assert 1 / abs(G[1][0]) ** 2 == pytest.approx(ea * ec, rel=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_deck_conditions(self, seed):
        path, b, z = solved(seed, min_letters=3)
        dev = develop_torus(path, z)
        for L in dev.layers[1:path.N - 1]:
            zeta, zeta_p = L.normalized()
            G = deck_map(-1.0 + 0j, zeta, zeta_p)
            assert mobius_apply(G, -1.0 + 0j) == np.inf or abs(mobius_apply(G, -1.0 + 0j)) > 1e12
            assert mobius_apply(G, np.inf) == pytest.approx(1.0, abs=1e-12)
            assert mobius_apply(G, zeta) == pytest.approx(zeta_p, abs=1e-12)
            # matches u -> 1 - (zeta + 1)(1 - zeta') / (u + 1)
            u = 0.37 + 0.81j
            f = 1 - (zeta + 1) * (1 - zeta_p) / (u + 1)
            assert mobius_apply(G, u) == pytest.approx(f, abs=1e-12)

    def test_handedness_of_parabolic(self):
        assert handedness(((1, 1), (0, 1))) == 4

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 10), st.floats(-pi, pi),
           st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
    def test_similarity_invariance(self, seed, r, phi, shift):
        path, b, z = solved(seed, min_letters=3)
        dev = develop_torus(path, z)
        L = dev.layers[1]
        zeta, zeta_p = L.normalized()
        (a, _), (bb, _), (c, _) = edge_vectors(zeta, zeta_p)
        lam = r * cmath.exp(1j * phi)

        def vecs(S, k):
            return [horoball_vector(S(zeta), k * a * bb), horoball_vector(S(zeta_p), k * bb * c),
                    horoball_vector(np.inf, k)], horoball_vector(S(1.0), k * a * c), \
                horoball_vector(S(-1.0), k * a * c)

        f0, P0, Q0 = vecs(lambda u: u, 1.0)
        f1, P1, Q1 = vecs(lambda u: lam * u + shift, abs(lam))
        c0, l0 = solve_face(f0, P0, Q0)
        c1, l1 = solve_face(f1, P1, Q1)
        np.testing.assert_allclose(c1, c0, atol=1e-10)
        assert l1 == pytest.approx(l0, abs=1e-10)
        # global rescale of every horoball vector
        c2, l2 = solve_face([[3.0 * t for t in v] for v in f0],
                            [3.0 * t for t in P0], [3.0 * t for t in Q0])
        np.testing.assert_allclose(c2, c0, atol=1e-10)


class TestHolonomy:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_maximizer_passes(self, seed):
        path, b, z = solved(seed)
        rep = holonomy_check(path, z)
        assert rep.shape_product < 1e-9
        assert rep.angle_sum < 1e-9
        assert rep.meridian < 1e-8
        assert rep.deck < 1e-8
        assert rep.notch < 1e-8

    def test_single_tetrahedron(self):
        path = farey_path(*STD, path_from_word("L"))
        assert path.N == 2
        b = BoundaryAngles(0.9, 0.8, pi - 1.7)
        z = maximize(path, b).z_star
        rep = holonomy_check(path, z)
        assert rep.max_residual < 1e-12

    def test_perturbation_detected(self):
        path = farey_path(*STD, path_from_word("RRLR"))
        b = BoundaryAngles(0.8, 0.9, pi - 1.7)
        z = maximize(path, b).z_star
        for i in range(2, path.N):
            zp = z.copy()
            zp[i] += 1e-3
            if np.min(tet_angles(path, zp)) <= 0:
                continue
            shape, _ = edge_shape_residuals(path, zp)
            assert 1e-5 < shape < 1e-1

    def test_angle_sum_exact_off_optimum(self):
        # angle sums hold for any z; only the moduli detect non-optimality
        path = farey_path(*STD, path_from_word("RRLR"))
        b = BoundaryAngles(0.8, 0.9, pi - 1.7)
        z = maximize(path, b).z_star
        z[3] += 1e-3
        shape, asum = edge_shape_residuals(path, z)
        assert asum < 1e-12
        assert shape > 1e-5
