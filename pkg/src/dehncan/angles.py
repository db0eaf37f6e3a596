"""
Angle structures on the layered solid torus.

An angle structure is coordinatized by ``z = (z_0, ..., z_N)`` with
``z_0 = pi + theta_q``, ``z_1 = pi - theta_r`` and ``z_N = 0``. Tetrahedron
i (1 <= i <= N-1) has angles x_i, y_i (at the right and left ends of e_i)
and z_i, read off ``(a, b, c) = (z_{i-1}, z_i, z_{i+1})``:

=========  ================  ================
letters    x                 y
=========  ================  ================
R R        (a - 2b + c)/2    pi - (a + c)/2
L L        pi - (a + c)/2    (a - 2b + c)/2
R L        (a - b - c)/2     pi - (a + b - c)/2
L R        pi - (a + b - c)/2  (a - b - c)/2
=========  ================  ================
"""
from dataclasses import dataclass
from functools import lru_cache
from math import pi

import numpy as np

from ._num import EXTENDED, backend_for
from .farey import farey_path, wedge, parse_slope

__all__ = [
    "BoundaryAngles",
    "InfeasibleError",
    "feasible",
    "path_thetas",
    "fixed_z",
    "angle_rows",
    "tet_angles",
    "Residuals",
    "residuals",
    "initial_point",
    "edge_classes",
    "edge_angle_sums",
]

EQ_TOL = 1e-12


class InfeasibleError(ValueError):
    """No strict angle structure exists for the given data."""


@dataclass(frozen=True)
class BoundaryAngles:
    """Exterior dihedral angles at the boundary edges p, q, r."""

    theta_p: float
    theta_q: float
    theta_r: float

    def __post_init__(self):
        tp, tq, tr = self.theta_p, self.theta_q, self.theta_r
        if tp < 0 or tq < 0:
            raise ValueError("theta_p and theta_q must be non-negative")
        if not 0 < tr < pi:
            raise ValueError("theta_r must lie in (0, pi)")
        if abs(tp + tq + tr - pi) > 1e-12:
            raise ValueError(f"thetas must sum to pi, got {tp + tq + tr!r}")

    def as_tuple(self):
        return (self.theta_p, self.theta_q, self.theta_r)


@lru_cache(maxsize=4096)
def _check_configuration(p, q, r, m):
    # adjacent m (N = 1) is allowed and infeasible
    farey_path(p, q, r, m, allow_short=True)


def feasible(b, p, q, r, m):
    """
    Existence test for strict angle structures.

    Returns
    -------
    ok : bool
    margin : float
        ``(m^p) theta_p + (m^q) theta_q + (m^r) theta_r - 2 pi``.
    """
    p, q, r, m = (parse_slope(s) for s in (p, q, r, m))
    _check_configuration(p, q, r, m)
    margin = (wedge(m, p) * b.theta_p + wedge(m, q) * b.theta_q
              + wedge(m, r) * b.theta_r - 2 * pi)
    return margin > 0, margin


def path_thetas(path, b):
    """(theta_p, theta_q, theta_r) in path order (undoing the p/q swap)."""
    tp, tq, tr = b.as_tuple()
    if path.pq_swapped:
        tp, tq = tq, tp
    return tp, tq, tr


def fixed_z(path, b):
    """The pinned entries (z_0, z_1)."""
    _, tq, tr = path_thetas(path, b)
    return pi + tq, pi - tr


def angle_rows(letters, a, b, c):
    """
    Linear rows for (x, y, z) of one tetrahedron.

    ``letters`` is the pair (Omega_{i-1}, Omega_i); a, b, c are the column
    indices of (z_{i-1}, z_i, z_{i+1}). Returns (coef, const) with coef a
    list of three dicts {column: weight}.
    """
    lo, hi = letters
    if lo == hi:
        small = {a: 0.5, b: -1.0, c: 0.5}
        big = {a: -0.5, c: -0.5}
    else:
        small = {a: 0.5, b: -0.5, c: -0.5}
        big = {a: -0.5, b: -0.5, c: 0.5}
    zz = {b: 1.0}
    small_first = (lo == "R")
    if small_first:
        return [small, big, zz], [0.0, pi, 0.0]
    return [big, small, zz], [pi, 0.0, 0.0]


def _merge(rows, n):
    out = np.zeros(n)
    for k, w in rows.items():
        out[k] += w
    return out


def tet_matrix(path):
    """(A, c) with tetrahedron angles ``(A @ z + c).reshape(N-1, 3)``."""
    N = path.N
    A = np.zeros((3 * (N - 1), N + 1))
    c = np.zeros(3 * (N - 1))
    for i in range(1, N):
        coef, const = angle_rows((path.word[i - 1], path.word[i]), i - 1, i, i + 1)
        for k in range(3):
            A[3 * (i - 1) + k] = _merge(coef[k], N + 1)
            c[3 * (i - 1) + k] = const[k]
    return A, c


def tet_angles(path, z):
    """
    Angles (x_i, y_i, z_i), i = 1..N-1.

    Returns an (N-1, 3) float array, or nested lists of mpmath numbers when
    z holds mpmath numbers (the constants pi are then taken exactly).
    """
    if backend_for(z) is EXTENDED:
        if len(z) != path.N + 1:
            raise ValueError(f"expected {path.N + 1} z entries, got {len(z)}")
        A, c = tet_matrix(path)
        out = []
        for k in range(A.shape[0]):
            acc = int(round(c[k] / pi)) * EXTENDED.pi
            for j in np.flatnonzero(A[k]):
                acc += float(A[k, j]) * z[j]
            out.append(acc)
        return [out[3 * i:3 * i + 3] for i in range(path.N - 1)]
    z = np.asarray(z, dtype=float)
    if z.shape != (path.N + 1,):
        raise ValueError(f"expected {path.N + 1} z entries, got {z.shape}")
    A, c = tet_matrix(path)
    return (A @ z + c).reshape(path.N - 1, 3)


@dataclass
class Residuals:
    """
    Slacks of the strict system; positive means satisfied.

    ``pinned`` is the largest deviation of (z_0, z_1, z_N) from their
    prescribed values.
    """

    hinge: float
    convexity: float
    range: float
    z2: float
    pinned: float

    @property
    def ok(self):
        return (self.hinge > 0 and self.convexity > 0 and self.range > 0
                and self.z2 > 0 and self.pinned <= EQ_TOL)

    def violations(self):
        return {k: max(0.0, -getattr(self, k))
                for k in ("hinge", "convexity", "range", "z2")}


def residuals(path, z, b):
    """Slacks of the hinge, convexity, range and z_2 conditions."""
    z = np.asarray(z, dtype=float)
    N = path.N
    z0, z1 = fixed_z(path, b)
    _, tq, _ = path_thetas(path, b)
    hinge, convex = [np.inf], [np.inf]
    for i in range(1, N):
        a, bb, c = z[i - 1], z[i], z[i + 1]
        if path.hinge[i]:
            hinge.append(a - bb - c)
        else:
            convex.append(a + c - 2 * bb)
    inner = z[2:N]
    rng = min(np.min(inner), np.min(pi - inner)) if inner.size else np.inf
    z2 = pi - tq - z[2]
    pinned = max(abs(z[0] - z0), abs(z[1] - z1), abs(z[N]))
    return Residuals(min(hinge), min(convex), float(rng), float(z2), float(pinned))


def _decreasing_tail(total, count, cap):
    """``count`` strictly decreasing positive steps below ``cap`` summing to ``total``."""
    if count == 1:
        return [total]
    mean = total / count
    top = 0.5 * (mean + min(cap, 2 * mean))
    step = 2 * (top - mean) / (count - 1)
    return [top - k * step for k in range(count)]


def initial_point(path, b):
    """
    A strictly interior point of the angle-structure polytope.

    Without hinges the sequence is convex and decreasing. Otherwise a convex
    decreasing prefix runs up to the first hinge index h and the tail
    ``z_i = eps * z'_i`` (``z'_N = 0``, ``z'_{N-1} = 1``, ``z'_i = 3 z'_{i+1}``)
    is scaled by half the admissible bound.
    """
    N = path.N
    z0, z1 = fixed_z(path, b)
    _, tq, tr = path_thetas(path, b)
    d1 = z0 - z1
    z = np.zeros(N + 1)
    z[0], z[1] = z0, z1
    hinges = [i for i in range(1, N) if path.hinge[i]]
    if not hinges:
        if N == 2:
            if not z1 < d1:
                raise InfeasibleError("no angle structure: z_1 >= z_0 - z_1")
            return z
        S = z1 / (N - 1)
        lo = max(S, tq - tr)
        if not lo < d1:
            raise InfeasibleError("no angle structure for these boundary angles")
        d2 = 0.5 * (lo + min(d1, z1))
        steps = [d2] + _decreasing_tail(z1 - d2, N - 2, d2)
        for i, d in enumerate(steps, start=2):
            z[i] = z[i - 1] - d
        z[N] = 0.0
        return z
    h = hinges[0]
    # steps d_2 > d_3 > ... with d_i = d_3 / (i-2)^2: polynomial decay keeps
    # consecutive differences resolvable in double precision
    d2 = 0.5 * (max(tq - tr, 0.0) + min(d1, z1))
    d3 = min(0.5 * d2, 0.5 * (z1 - d2) * 6 / pi**2)
    for i in range(2, h + 1):
        z[i] = z[i - 1] - (d2 if i == 2 else d3 / (i - 2) ** 2)
    zp = np.zeros(N + 1)
    if h + 1 <= N - 1:
        zp[N - 1] = 1.0
        for i in range(N - 2, h, -1):
            zp[i] = 3 * zp[i + 1]
        bound = min((z[h - 1] - z[h]) / zp[h + 1], z[h] / (2 * zp[h + 1]))
        eps = 0.5 * bound
        z[h + 1:] = eps * zp[h + 1:]
    z[N] = 0.0
    return z


def edge_classes(path):
    """
    Edge classes of the triangulated solid torus.

    Returns a dict mapping each Farey label of T_0..T_{N-1} to a class
    representative; the two ends of e_N are identified by the fold.
    """
    labels = set()
    for T in path.triangles[:-1]:
        labels.update(T.vertices)
    rep = {s: s for s in labels}
    s, t = path.right[path.N], path.left[path.N]
    for lab in labels:
        if lab == t:
            rep[lab] = s
    return rep


def edge_angle_sums(path, z):
    """
    Dihedral angle sum around each edge class.

    Interior classes should give 2 pi and the classes of p, q, r give
    pi - theta.
    """
    ang = tet_angles(path, z)
    rep = edge_classes(path)
    sums = {}
    for i in range(1, path.N):
        x, y, w = ang[i - 1]
        for lab, val in ((path.right[i], 2 * x), (path.left[i], 2 * y),
                         (path.dropped(i), w), (path.new[i], w)):
            k = rep[lab]
            sums[k] = sums.get(k, 0.0) + val
    return sums
