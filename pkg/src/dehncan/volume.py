"""
Lobachevsky function and volume maximization over angle structures.

The Lobachevsky function is evaluated from the Clausen series
``Lambda(x) = Cl_2(2x) / 2`` with the Fourier coefficients resummed through
Bernoulli numbers,

    Cl_2(t) = t - t log|t| + sum_k |B_2k| t^(2k+1) / (2k (2k+1)!),

valid for |t| <= pi after reduction modulo 2 pi. The terms decay at least
like 4^-k, so 30 terms reach double precision everywhere.
"""
from dataclasses import dataclass
from math import pi, factorial, gcd, log, sin, fsum
import os

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

from ._num import EXTENDED_DPS
from .angles import (InfeasibleError, fixed_z, initial_point, path_thetas,
                     tet_matrix)

__all__ = [
    "lobachevsky",
    "dlobachevsky",
    "tet_volume",
    "AngleProblem",
    "torus_problem",
    "ascent",
    "VolumeResult",
    "maximize",
    "resolve_precision",
    "fixed_z_exact",
    "total_volume",
    "SpunTorusResult",
    "spun_torus_solve",
    "ConvergenceError",
]

GRAD_TOL = 1e-10
MAX_ITER = 10_000
STALL_ITER = 50
# double-precision stage before the multiprecision polish
PRESOLVE_TOL = 1e-7
_NTERMS = 30


class ConvergenceError(RuntimeError):
    """The optimizer hit its iteration cap or stalled; ``u`` is the last iterate."""

    def __init__(self, msg, u=None, iterations=0):
        super().__init__(msg)
        self.u = u
        self.iterations = iterations


def _clausen_coeffs(n):
    # exact rationals: scipy's float Bernoulli numbers lose ~1e-12 at k = 30
    return np.array([float(abs(mp.bernfrac(2 * k)[0]) / mp.mpf(mp.bernfrac(2 * k)[1])
                           / (2 * k * factorial(2 * k + 1)))
                     for k in range(1, n + 1)])


_COEF = _clausen_coeffs(_NTERMS)


def lobachevsky(x):
    """
    Lobachevsky function ``-int_0^x log|2 sin t| dt``.

    Odd and pi-periodic. Accepts scalars or arrays.

    Examples
    --------
    >>> round(lobachevsky(np.pi / 6), 7)
    0.5074708
    """
    x = np.asarray(x, dtype=float)
    # reduce to (-pi/2, pi/2]
    t = 2.0 * (x - pi * np.round(x / pi))
    at = np.abs(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.where(at > 0, t - t * np.log(np.where(at > 0, at, 1.0)), 0.0)
    t2 = t * t
    acc = np.zeros_like(t)
    for c in _COEF[::-1]:
        acc = acc * t2 + c
    out = 0.5 * (head + acc * t2 * t)
    return out[()] if out.ndim == 0 else out


def dlobachevsky(x):
    """Derivative ``-log|2 sin x|``."""
    return -np.log(np.abs(2.0 * np.sin(x)))


def tet_volume(x, y=None, z=None):
    """
    Volume of the ideal tetrahedron with dihedral angles x, y, z.

    Raises
    ------
    ValueError
        If the angles are negative or their sum misses pi by more than 1e-9.
    """
    if y is None:
        x, y, z = x
    if min(x, y, z) < 0:
        raise ValueError("negative dihedral angle")
    if abs(x + y + z - pi) > 1e-9:
        raise ValueError(f"angle sum {x + y + z!r} differs from pi")
    return float(fsum(lobachevsky(np.array([x, y, z]))))


def _logsin_cot(ang):
    """log(2 sin) and cot for triples of angles, using complements for big angles."""
    a = ang.reshape(-1, 3)
    comp = np.empty_like(a)
    comp[:, 0] = a[:, 1] + a[:, 2]
    comp[:, 1] = a[:, 0] + a[:, 2]
    comp[:, 2] = a[:, 0] + a[:, 1]
    use = np.minimum(a, comp)
    s = np.sin(use)
    ls = np.log(2.0 * s)
    cot = np.cos(a) / s
    return ls.ravel(), cot.ravel()


class AngleProblem:
    """
    Tetrahedron angles affine in free variables: ``angles = M @ u + g``.

    Rows come in consecutive triples (x, y, z) per tetrahedron, and
    ``weights[k]`` counts the copies of tetrahedron k.
    """

    def __init__(self, M, g, weights=None, exact_g=None):
        self.M = np.asarray(M, dtype=float)
        self.g = np.asarray(g, dtype=float)
        ntet = self.g.size // 3
        self.weights = np.ones(ntet) if weights is None else np.asarray(weights, float)
        self._w3 = np.repeat(self.weights, 3)
        # callable returning g in mpmath at the current working precision
        self.exact_g = exact_g

    @property
    def nvar(self):
        return self.M.shape[1]

    def angles(self, u):
        return self.M @ np.asarray(u, dtype=float) + self.g

    def interior(self, u):
        return bool(np.all(self.angles(u) > 0))

    def value(self, u):
        ang = self.angles(u)
        return float(fsum(self._w3 * lobachevsky(ang)))

    def gradient(self, u):
        ls, _ = _logsin_cot(self.angles(u))
        return -self.M.T @ (self._w3 * ls)

    def hessian(self, u):
        _, cot = _logsin_cot(self.angles(u))
        return -(self.M.T * (self._w3 * cot)) @ self.M


def ascent(problem, u0, tol=GRAD_TOL, max_iter=MAX_ITER):
    """
    Maximize a volume functional from a strictly interior start.

    Damped Newton steps with backtracking that never leaves the open
    polytope; a steepest-ascent step is used whenever the Newton direction
    is not an ascent direction. Near the optimum, where volume increments
    drop below rounding, a full step is accepted as soon as it reduces the
    gradient norm.

    Returns
    -------
    u, value, grad_norm, iterations

    Raises
    ------
    ConvergenceError
        At the iteration cap, or when the gradient norm has not improved for
        STALL_ITER iterations (its rounding floor lies above ``tol``).
    """
    u = np.array(u0, dtype=float)
    if not problem.interior(u):
        raise InfeasibleError("starting point is not interior")
    if problem.nvar == 0:
        return u, problem.value(u), 0.0, 0
    g = problem.gradient(u)
    gn = np.max(np.abs(g))
    it = 0
    stall = 0
    best, best_it = gn, 0
    while gn > tol:
        if it >= max_iter:
            raise ConvergenceError(f"no convergence after {it} iterations (|grad|={gn:.3e})",
                                   u, it)
        if it - best_it >= STALL_ITER:
            raise ConvergenceError(f"gradient stalled at {best:.3e} above tol={tol:.1e}; "
                                   "try extended precision", u, it)
        it += 1
        H = problem.hessian(u)
        try:
            L = np.linalg.cholesky(-H)
            d = np.linalg.solve(L.T, np.linalg.solve(L, g))
        except np.linalg.LinAlgError:
            d = g.copy()
        slope = g @ d
        if not slope > 0:
            d, slope = g.copy(), g @ g
        v0 = problem.value(u)
        t = 1.0
        accepted = False
        while t > 1e-14:
            un = u + t * d
            if problem.interior(un):
                vn = problem.value(un)
                if vn >= v0 + 1e-4 * t * slope:
                    accepted = True
                    break
                gn_try = np.max(np.abs(problem.gradient(un)))
                if gn_try < gn and abs(vn - v0) <= 1e-12 * max(1.0, abs(v0)):
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            stall += 1
            if stall > 3:
                raise ConvergenceError(f"line search failed (|grad|={gn:.3e})", u, it)
            continue
        u = un
        g = problem.gradient(u)
        gn = np.max(np.abs(g))
        if gn < best:
            best, best_it = gn, it
    return u, problem.value(u), float(gn), it


def _ascent_extended(problem, u0, dps=EXTENDED_DPS, max_iter=100):
    """
    Newton polish in multiprecision arithmetic.

    Returns the maximizer as a list of mpmath numbers carrying ``dps``
    digits (the caller must keep working at that precision) and the
    gradient infinity norm there.
    """
    n = len(u0)
    M = problem.M
    rows = [[(j, float(M[k, j])) for j in np.flatnonzero(M[k])]
            for k in range(M.shape[0])]
    with mp.workdps(dps):
        if problem.exact_g is not None:
            g0 = list(problem.exact_g())
        else:
            g0 = [mp.mpf(v) for v in problem.g]
        w3 = [mp.mpf(w) for w in problem._w3]
        u = [mp.mpf(float(v)) for v in u0]

        def angles(u):
            return [g0[k] + mp.fsum(c * u[j] for j, c in rows[k])
                    for k in range(len(rows))]

        def complement(a, k):
            base = 3 * (k // 3)
            return a[base] + a[base + 1] + a[base + 2] - a[k]

        tol = mp.mpf(10) ** (-(dps - 8))
        for _ in range(max_iter):
            a = angles(u)
            gr = [mp.mpf(0)] * n
            H = mp.zeros(n, n)
            for k, row in enumerate(rows):
                if not row:
                    continue
                s = mp.sin(min(a[k], complement(a, k)))
                ls = mp.log(2 * s)
                ct = mp.cos(a[k]) / s
                for i, ci in row:
                    gr[i] -= w3[k] * ls * ci
                    for j, cj in row:
                        H[i, j] -= w3[k] * ct * ci * cj
            gnorm = max(abs(v) for v in gr)
            if gnorm < tol:
                break
            d = mp.lu_solve(-H, mp.matrix(gr))
            t = mp.mpf(1)
            while True:
                un = [u[i] + t * d[i] for i in range(n)]
                if all(v > 0 for v in angles(un)):
                    break
                t /= 2
            u = un
        return u, float(gnorm)


@dataclass
class VolumeResult:
    """
    Maximizer of a volume functional.

    ``z_exact`` holds the maximizer as mpmath numbers when extended
    precision was used (None otherwise); ``dps`` is their precision.
    """

    z_star: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    angles: np.ndarray = None
    z_exact: list = None
    dps: int = None


def torus_problem(path, b):
    """AngleProblem over the free coordinates z_2..z_{N-1}."""
    N = path.N
    A, c = tet_matrix(path)
    z0, z1 = fixed_z(path, b)
    base = np.zeros(N + 1)
    base[0], base[1] = z0, z1
    M = A[:, 2:N]
    g = A @ base + c

    def exact_g():
        zx = fixed_z_exact(path, b)
        return [zx[0] * float(A[k, 0]) + zx[1] * float(A[k, 1])
                + int(round(c[k] / pi)) * mp.pi for k in range(A.shape[0])]

    return AngleProblem(M, g, exact_g=exact_g), base


def fixed_z_exact(path, b):
    """(z_0, z_1) in mpmath at the working precision."""
    _, tq, tr = path_thetas(path, b)
    return mp.pi + tq, mp.pi - tr


AUTO_EXTENDED_N = 10


def _requested_precision(precision):
    if precision is None:
        precision = os.environ.get("DEHNCAN_PRECISION", "auto").strip().lower()
    if precision not in ("double", "extended", "auto"):
        raise ValueError(f"unknown precision mode {precision!r}")
    return precision


def resolve_precision(precision, N):
    """
    Precision mode for a problem of size N.

    ``None`` reads DEHNCAN_PRECISION (default 'auto'); 'auto' selects
    'extended' when N > AUTO_EXTENDED_N, where faces near the core become
    flatter than double precision resolves.
    """
    precision = _requested_precision(precision)
    if precision == "auto":
        return "extended" if N > AUTO_EXTENDED_N else "double"
    return precision


def maximize(path, b, z0=None, tol=GRAD_TOL, max_iter=MAX_ITER, precision=None,
             dps=EXTENDED_DPS):
    """
    Maximize the volume over angle structures of the layered solid torus.

    Parameters
    ----------
    path : FareyPath
    b : BoundaryAngles
    z0 : array_like, optional
        Interior starting point (defaults to ``initial_point(path, b)``).
    precision : {'double', 'extended', 'auto'}, optional
        'extended' polishes the double-precision optimum with a
        multiprecision Newton iteration and keeps the result in
        ``z_exact``. See `resolve_precision` for the default; under 'auto'
        a double-precision ascent that stalls above ``tol`` (nearly flat
        tetrahedra) is handed to the multiprecision polish.

    Returns
    -------
    VolumeResult
    """
    N = path.N
    prob, base = torus_problem(path, b)
    if z0 is None:
        z0 = initial_point(path, b)
    u0 = np.asarray(z0, dtype=float)[2:N]
    extended = resolve_precision(precision, N) == "extended"
    try:
        u, val, gn, it = ascent(prob, u0, tol=max(tol, PRESOLVE_TOL) if extended else tol,
                                max_iter=max_iter)
    except ConvergenceError as e:
        if extended or _requested_precision(precision) != "auto" or e.u is None:
            raise
        u, it, extended = e.u, e.iterations, True
    z = base.copy()
    z[2:N] = u
    if not extended:
        return VolumeResult(z, val, gn, it, prob.angles(u).reshape(-1, 3))
    ux, gn = _ascent_extended(prob, u, dps=dps) if prob.nvar else ([], 0.0)
    with mp.workdps(dps):
        zx = list(fixed_z_exact(path, b)) + list(ux) + [mp.mpf(0)]
    u = np.array([float(v) for v in ux])
    z[2:N] = u
    return VolumeResult(z, prob.value(u), gn, it, prob.angles(u).reshape(-1, 3), zx, dps)


def total_volume(path, z):
    """Volume of the angle structure z (flat tetrahedra allowed)."""
    A, c = tet_matrix(path)
    ang = A @ np.asarray(z, dtype=float) + c
    return float(fsum(lobachevsky(ang)))


@dataclass
class SpunTorusResult:
    alpha: float
    beta: float
    gamma: float
    delta: tuple
    delta_prime: tuple
    eta_mu: float
    volume: float


def _spun_deltas(a, b, c, al, be, ga):
    d = ((pi - a) / 2 + al, (pi - b) / 2 + be, (pi - c) / 2 + ga)
    dp = ((pi - a) / 2 - al, (pi - b) / 2 - be, (pi - c) / 2 - ga)
    return d, dp


def spun_eta(a, b, c, n_a, n_c, al, be, ga):
    """Scaling holonomy of the meridian for the spun pair of tetrahedra."""
    d, dp = _spun_deltas(a, b, c, al, be, ga)
    return ((sin(d[1]) / sin(dp[1])) ** (n_a + n_c)
            * (sin(d[2]) / sin(dp[2])) ** (-n_c)
            * (sin(d[0]) / sin(dp[0])) ** (-n_a))


def spun_torus_solve(a, b, c, n_a, n_c, require_coprime=True):
    """
    Two-tetrahedron spun solid torus with exterior angles a, b, c.

    The angle structures with meridian rotation 2 pi form a segment
    ``(alpha, beta, gamma) = P0 + t (n_a, -n_a - n_c, n_c)``; the volume
    is strictly concave on it and its derivative in t is ``-log eta``, so the
    maximizer is the root of ``log eta``.

    ``require_coprime=False`` admits non-primitive meridian classes, for
    which the same segment and functional still make sense.

    Raises
    ------
    InfeasibleError
        If ``a n_a + b n_b + c n_c <= 2 pi`` with ``n_b = n_a + n_c``.
    """
    if abs(a + b + c - pi) > 1e-9 or min(a, b, c) < 0 or max(a, b, c) >= pi:
        raise ValueError("need a, b, c in [0, pi) summing to pi")
    if n_a <= 0 or n_c <= 0:
        raise ValueError("n_a, n_c must be positive")
    if require_coprime and gcd(n_a, n_c) != 1:
        raise ValueError("n_a, n_c must be coprime")
    n_b = n_a + n_c
    if not a * n_a + b * n_b + c * n_c > 2 * pi:
        raise InfeasibleError("a n_a + b n_b + c n_c must exceed 2 pi")
    al0, ga0 = pi / (2 * n_c), -pi / (2 * n_a)
    be0 = -al0 - ga0
    dirn = np.array([n_a, -n_b, n_c], dtype=float)
    p0 = np.array([al0, be0, ga0])
    half = np.array([(pi - a) / 2, (pi - b) / 2, (pi - c) / 2])
    # all six deltas positive: |p0 + t dirn| < half componentwise
    lo, hi = -np.inf, np.inf
    for k in range(3):
        bounds = sorted(((-half[k] - p0[k]) / dirn[k], (half[k] - p0[k]) / dirn[k]))
        lo, hi = max(lo, bounds[0]), min(hi, bounds[1])
    if not lo < hi:
        raise InfeasibleError("empty segment of spun angle structures")

    def log_eta(t):
        al, be, ga = p0 + t * dirn
        d, dp = _spun_deltas(a, b, c, al, be, ga)
        return ((n_a + n_c) * (log(sin(d[1])) - log(sin(dp[1])))
                - n_c * (log(sin(d[2])) - log(sin(dp[2])))
                - n_a * (log(sin(d[0])) - log(sin(dp[0]))))

    w = hi - lo
    t_lo, t_hi = lo + 1e-15 * w, hi - 1e-15 * w
    t = brentq(log_eta, t_lo, t_hi, xtol=1e-16, rtol=1e-15, maxiter=500)
    al, be, ga = p0 + t * dirn
    d, dp = _spun_deltas(a, b, c, al, be, ga)
    vol = tet_volume(*d) + tet_volume(*dp)
    return SpunTorusResult(float(al), float(be), float(ga), d, dp,
                           spun_eta(a, b, c, n_a, n_c, al, be, ga), vol)
