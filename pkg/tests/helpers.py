"""Shared test oracles and random instance generators."""
from math import pi, log, sin
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from dehncan.angles import BoundaryAngles, feasible
from dehncan.farey import Slope, farey_path, make_slope, path_from_word

STD = (Slope(0, 1), Slope(1, 0), Slope(-1, 1))


def quad_lobachevsky(x):
    """
    -int_0^x log|2 sin t| dt by adaptive quadrature.

    Breakpoints at multiples of pi/2, so every piece has at most one
    logarithmic endpoint singularity. QUADPACK sometimes reports roundoff
    on those pieces although the result is good to about 1e-13 (checked
    against mpmath in test_volume), so its warnings are silenced.
    """
    if x == 0:
        return 0.0
    sgn = 1.0 if x > 0 else -1.0
    x = abs(x)
    f = lambda t: -log(abs(2.0 * sin(t)))  # noqa: E731
    edges = [0.0] + [k * pi / 2 for k in range(1, int(x // (pi / 2)) + 1)] + [x]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                total += quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-13)[0]
    return sgn * total


def random_unimodular(rng, steps=4):
    gens = [((1, 1), (0, 1)), ((1, 0), (1, 1)), ((0, -1), (1, 0))]
    M = ((1, 0), (0, 1))
    for _ in range(steps):
        G = gens[rng.integers(len(gens))]
        M = tuple(tuple(sum(M[i][k] * G[k][j] for k in range(2)) for j in range(2))
                  for i in range(2))
    return M


def act(M, s):
    (a, b), (c, d) = M
    x, y = s.vector
    return make_slope(c * x + d * y, a * x + b * y)


def random_thetas(rng, p, q, r, m, min_margin=0.05, tries=1000):
    for _ in range(tries):
        th = rng.dirichlet([1.0, 1.0, 1.0]) * pi
        try:
            b = BoundaryAngles(th[0], th[1], pi - th[0] - th[1])
        except ValueError:
            continue
        ok, margin = feasible(b, p, q, r, m)
        if ok and margin > min_margin:
            return b
    raise RuntimeError("no feasible thetas found")


def random_instance(rng, min_letters=1, max_letters=5, moved=True):
    """(p, q, r, m, path, b) with a random word and feasible thetas."""
    n = int(rng.integers(min_letters, max_letters + 1))
    word = "".join("LR"[i] for i in rng.integers(0, 2, size=n))
    p, q, r = STD
    m = path_from_word(word)
    if moved:
        M = random_unimodular(rng, int(rng.integers(0, 6)))
        p, q, r, m = (act(M, s) for s in (p, q, r, m))
    path = farey_path(p, q, r, m)
    b = random_thetas(rng, p, q, r, m)
    return p, q, r, m, path, b


def words_up_to(length):
    out = []
    for n in range(1, length + 1):
        for k in range(2 ** n):
            out.append("".join("LR"[(k >> i) & 1] for i in range(n)))
    return out


def grid_maximize(f, inside, x0, h0=1e-3, h1=1e-5):
    """
    Brute-force grid search oracle.

    Hill climbing on the lattice x0 + h Z^n with the stencil of all moves
    +-e_i and +-e_i +- e_j, first at step h0 and then refined to h1. The
    diagonal moves let it follow narrow ridges of ill-conditioned problems.
    `inside(x)` guards the domain.
    """
    x = np.array(x0, dtype=float)
    n = len(x)
    eye = np.eye(n)
    stencil = [s * eye[i] for i in range(n) for s in (1, -1)]
    stencil += [s * eye[i] + t * eye[j] for i in range(n) for j in range(i + 1, n)
                for s in (1, -1) for t in (1, -1)]
    for h in (h0, h1):
        best = f(x)
        moved = True
        while moved:
            moved = False
            for d in stencil:
                while True:
                    y = x + h * d
                    if not inside(y):
                        break
                    val = f(y)
                    if val <= best:
                        break
                    x, best, moved = y, val, True
    return x
