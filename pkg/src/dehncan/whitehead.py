"""
Dehn fillings of one cusp of the Whitehead link complement.

The filling slope ``k AA' + l AB`` is given by coprime integers (k, l).
For odd l the filled manifold is built from the double cover Y of a layered
solid torus X with meridian ``m = l/(2k)``; for even l from a twice-punctured
solid torus with meridian ``m = (l/2)/k`` whose innermost hexagon is pinched
and filled by one extra tetrahedron. In both cases the boundary of Y is two
ideal quadrilaterals glued to each other, the boundary angles are
``(theta_p, theta_q, theta_r)`` with theta = 0 on the diagonal slope +-1,
and the volume is maximized jointly over theta and the z coordinates.
"""
from contextlib import nullcontext
from dataclasses import dataclass, field
from math import gcd, pi

import mpmath as mp
import numpy as np
from scipy.optimize import linprog

from ._num import EXTENDED, EXTENDED_DPS, backend_for
from .angles import (BoundaryAngles, InfeasibleError, angle_rows,
                     initial_point)
from .canonical import (HOLONOMY_TOL, FaceCertificate, FaceOrientationError,
                        _verdict, certify, default_floor, face_convexity,
                        handedness_check, solve_face)
from .develop import (hexagon_chain, horoball_vector, _deck_consistency,
                      _shape_at)
from .farey import Slope, farey_path, make_slope, wedge
from .volume import (AngleProblem, ConvergenceError, GRAD_TOL, MAX_ITER,
                     PRESOLVE_TOL, _ascent_extended, _requested_precision, ascent,
                     lobachevsky, resolve_precision)

__all__ = [
    "FillingSlope",
    "EXCEPTIONAL",
    "gate",
    "WhiteheadSetup",
    "setup",
    "choose_pqr",
    "theta_triple",
    "theta_interval",
    "WhiteheadResult",
    "solve",
    "evaluate",
    "certify_boundary_faces",
    "unfilled_volume",
    "GateError",
]

EXCEPTIONAL = frozenset({(0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (1, -2)})


class GateError(ValueError):
    """Non-hyperbolic filling slope."""


@dataclass(frozen=True)
class FillingSlope:
    """Coprime pair (k, l) up to overall sign; stored with k >= 0 (l > 0 if k = 0)."""

    k: int
    l: int  # noqa: E741

    def __post_init__(self):
        k, l = int(self.k), int(self.l)  # noqa: E741
        if (k, l) == (0, 0) or gcd(abs(k), abs(l)) != 1:
            raise ValueError(f"({k}, {l}) is not a primitive slope")
        if k < 0 or (k == 0 and l < 0):
            k, l = -k, -l  # noqa: E741
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)

    @property
    def parity(self):
        return "even" if self.l % 2 == 0 else "odd"

    def __str__(self):
        return f"({self.k},{self.l})"


def gate(s):
    """True iff the filling along s is hyperbolic."""
    if not isinstance(s, FillingSlope):
        s = FillingSlope(*s)
    return (s.k, s.l) not in EXCEPTIONAL


# (p, q, r) by position of m; boundaries -2, -1, -1/2, 0, 1/2, 1, 2
_TABLE = [
    (Slope(1, 0), Slope(-1, 1), Slope(0, 1)),   # m < -2
    (Slope(-1, 1), Slope(1, 0), Slope(0, 1)),   # -2 < m < -1
    (Slope(-1, 1), Slope(0, 1), Slope(1, 0)),   # -1 < m < -1/2
    (Slope(0, 1), Slope(-1, 1), Slope(1, 0)),   # -1/2 < m < 0
    (Slope(0, 1), Slope(1, 1), Slope(1, 0)),    # 0 < m < 1/2
    (Slope(1, 1), Slope(0, 1), Slope(1, 0)),    # 1/2 < m < 1
    (Slope(1, 1), Slope(1, 0), Slope(0, 1)),    # 1 < m < 2
    (Slope(1, 0), Slope(1, 1), Slope(0, 1)),    # 2 < m
]
_CUTS = [(-2, 1), (-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1), (2, 1)]
_EXTRA = {
    Slope(-2, 1): _TABLE[0],
    Slope(-1, 2): _TABLE[3],
    Slope(1, 2): _TABLE[4],
    Slope(2, 1): _TABLE[7],
}


def choose_pqr(m, allow_extra=False):
    """
    Boundary triangle (p, q, r) for the meridian m.

    ``allow_extra`` admits m in {+-2, +-1/2} (even case).
    """
    if m in _EXTRA:
        if not allow_extra:
            raise GateError(f"m = {m} needs the even-case table")
        return _EXTRA[m]
    if m.is_inf or m in (Slope(0, 1), Slope(1, 1), Slope(-1, 1)):
        raise GateError(f"m = {m} is excluded")
    k = sum(1 for a, b in _CUTS if m.num * b > a * m.den)
    return _TABLE[k]


def _is_diag(s):
    return s in (Slope(1, 1), Slope(-1, 1))


def theta_triple(pqr, theta):
    """(theta_p, theta_q, theta_r): 0 on the diagonal slope, theta on the other."""
    p, q, _ = pqr
    if _is_diag(p):
        return (0.0, theta, pi - theta)
    if _is_diag(q):
        return (theta, 0.0, pi - theta)
    raise ValueError("neither p nor q is a diagonal slope")


def theta_interval(pqr, m, parity):
    """Feasible open interval (0, theta_max) of theta."""
    if parity == "even":
        return (0.0, pi)
    p, q, r = pqr
    x = q if _is_diag(p) else p
    # margin(theta) = (m^r)(pi - theta) + (m^x) theta - 2 pi
    A = (wedge(m, r) - 2) * pi
    B = wedge(m, x) - wedge(m, r)
    return (0.0, min(pi, -A / B))


@dataclass
class WhiteheadSetup:
    slope: FillingSlope
    parity: str
    m: Slope
    pqr: tuple
    theta_range: tuple
    path: object = field(repr=False, default=None)

    @property
    def theta_mid(self):
        return 0.5 * (self.theta_range[0] + self.theta_range[1])


def setup(s):
    """Parity dispatch, meridian, (p, q, r) and the theta interval."""
    if not isinstance(s, FillingSlope):
        s = FillingSlope(*s)
    if not gate(s):
        raise GateError(f"filling {s} is not hyperbolic: excluded slopes are "
                        "+-(0,1), +-(1,0), +-(1,1), +-(1,-1), +-(1,2), +-(1,-2)")
    if s.parity == "odd":
        m = make_slope(s.l, 2 * s.k)
        pqr = choose_pqr(m)
        path = farey_path(*pqr, m)
        if wedge(m, pqr[2]) < 3:
            raise GateError("internal: m^r < 3 in the odd case")
    else:
        m = make_slope(s.l // 2, s.k)
        pqr = choose_pqr(m, allow_extra=True)
        path = farey_path(*pqr, m, allow_short=True)
    return WhiteheadSetup(s, s.parity, m, pqr, theta_interval(pqr, m, s.parity), path)


def unfilled_volume():
    """Volume of the Whitehead link complement: four (pi/2, pi/4, pi/4) tetrahedra."""
    return float(4 * np.sum(lobachevsky(np.array([pi / 2, pi / 4, pi / 4]))))


def _word(S):
    w = S.path.word
    return w + w[-1] if S.parity == "even" else w


def _joint_rows(S):
    """
    Angle rows in the variables u = (theta, z_2, ..., z_K).

    Returns (M, gpi, weights, K) with angles ``M @ u + gpi * pi``. K is
    the last free z index (N-1 odd, N+1 even).
    """
    path = S.path
    N = path.N
    odd = S.parity == "odd"
    K = N - 1 if odd else N + 1
    nvar = K
    # z_0 = pi + theta_q and z_1 = pi - theta_r = theta
    s0 = 1.0 if _is_diag(path.p) else 0.0

    def zcol(j):
        """(coefficient vector over u, multiple of pi) for z_j."""
        v = np.zeros(nvar)
        if j == 0:
            v[0] = s0
            return v, 1.0
        if j == 1:
            v[0] = 1.0
            return v, 0.0
        if j <= K:
            v[j - 1] = 1.0
            return v, 0.0
        return v, 0.0  # z_N = 0 in the odd case

    rows, consts = [], []
    word = _word(S)
    ntet = N - 1 if odd else N
    for i in range(1, ntet + 1):
        coef, const = angle_rows((word[i - 1], word[i]), i - 1, i, i + 1)
        for k in range(3):
            v = np.zeros(nvar)
            c = const[k] / pi
            for j, w in coef[k].items():
                vj, cj = zcol(j)
                v += w * vj
                c += w * cj
            rows.append(v)
            consts.append(c)
    weights = [2.0] * ntet
    if not odd:
        b, _ = zcol(N)
        c, _ = zcol(N + 1)
        for v, cst in ((c, 0.0), (-b, 1.0), (b - c, 0.0)):
            rows.append(v)
            consts.append(cst)
        weights.append(1.0)
    return np.array(rows), np.array(consts), np.array(weights), K


def _joint_problem(S):
    M, gpi, w, K = _joint_rows(S)
    g = gpi * pi

    def exact_g():
        return [mp.mpf(float(c)) * mp.pi for c in gpi]

    return AngleProblem(M, g, weights=w, exact_g=exact_g), K


def _start(S, prob, theta0):
    """Strictly interior start with theta at theta0."""
    path = S.path
    if S.parity == "odd":
        b = BoundaryAngles(*theta_triple(S.pqr, theta0))
        z = initial_point(path, b)
        return np.concatenate([[theta0], z[2:path.N]])
    # maximize the smallest angle with theta fixed
    M, g = prob.M, prob.g
    base = g + M[:, 0] * theta0
    A = M[:, 1:]
    n = A.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A, np.ones((A.shape[0], 1))])
    res = linprog(c, A_ub=A_ub, b_ub=base, bounds=[(0, pi)] * n + [(None, 1.0)],
                  method="highs")
    if res.status != 0 or not res.x[-1] > 0:
        raise InfeasibleError("no interior angle structure found")
    u = np.concatenate([[theta0], res.x[:n]])
    if not prob.interior(u):
        raise InfeasibleError("linear program returned a boundary point")
    return u


@dataclass
class WhiteheadResult:
    """
    Complete structure and certificate of a Whitehead filling.

    ``z`` lists the torus coordinates (odd case) or the pair coordinates
    z_0..z_{N+1} (even case); ``angles`` holds one row per tetrahedron of
    the quotient (the pair angles for i <= N, then Delta_{N+1}).
    """

    setup: WhiteheadSetup
    theta: float
    z: np.ndarray
    volume: float
    angles: np.ndarray
    faces: list
    boundary_faces: list
    holonomy: dict
    handedness: object
    verdict: str
    offending: list
    margin_floor: float
    grad_norm: float
    iterations: int
    z_exact: list = None
    dps: int = None
    development: object = field(default=None, repr=False)

    @property
    def canonical(self):
        return self.verdict == "canonical"

    @property
    def all_faces(self):
        return list(self.faces) + list(self.boundary_faces)

    @property
    def min_margin(self):
        m = [f.margin for f in self.all_faces]
        return min(m) if m else float("nan")


def _zs(S, u, K):
    """Full z vector from the joint variables (scalar type of u kept)."""
    path = S.path
    theta = u[0]
    s0 = 1 if _is_diag(path.p) else 0
    z = [backend_for(u).pi + s0 * theta, theta] + list(u[1:K])
    if S.parity == "odd":
        z.append(0 * theta)
    return z


def _layer_label_index(layer, label):
    return layer.labels.index(label)


def odd_boundary_zeta(layer0, r, diag):
    """
    zeta of the outermost parallelogram: with R the vertex labelled r, F
    its flat neighbour and S its other neighbour, ``zeta = 2 (F - R) / (R - S)``.

    Returns (zeta, square_residual).
    """
    P = layer0.points
    kR = _layer_label_index(layer0, r)
    prv, nxt = (kR - 1) % 6, (kR + 1) % 6
    if layer0.labels[prv] in diag:
        kF, kS = prv, nxt
    elif layer0.labels[nxt] in diag:
        kF, kS = nxt, prv
    else:
        raise ValueError("no flat vertex next to r")
    R, F, S_ = P[kR], P[kF], P[kS]
    kO = (2 * kF - kR) % 6
    O = P[kO]
    # F is the midpoint of R and its other neighbour O, so the ideal
    # quadrilateral at F is a square
    scale = abs(F - R)
    square = float(max(abs(abs(F - R) - abs(F - O)), abs(2 * F - R - O)) / scale)
    return 2 * (F - R) / (R - S_), square


def odd_boundary_face(zeta, face_id="boundary"):
    """Certificate of the boundary face (inf, 1, -1) between two translates."""
    bk = backend_for((zeta,))
    if abs(zeta.imag) <= 1e-15 * max(1.0, abs(zeta)):
        raise FaceOrientationError("degenerate boundary parameter")
    a = abs(zeta)
    s2 = abs(zeta + 1) ** 2
    alpha = gamma = 1 / a
    beta = (s2 - 1) / a**2
    gap = s2 - (a - 1) ** 2
    one = bk.real(1)
    v_inf = horoball_vector(np.inf, one)
    v1 = horoball_vector(one, 2 * a)
    vm1 = horoball_vector(-one, 2 * a)
    P = horoball_vector(zeta + 1, a * a)
    Q = horoball_vector(-zeta - 1, a * a)
    coef, lam = solve_face((v1, v_inf, vm1), P, Q)
    return FaceCertificate(
        face_id=face_id, alpha=float(alpha), beta=float(beta), gamma=float(gamma),
        lam=float(lam), margin=float(alpha + beta + gamma - 1), z_value=float(gap),
        method="boundary-whitehead", margin_z=float(gap / a**2),
        margin_dense=float(sum(coef) - 1))


def even_core_faces(zeta, P3):
    """
    Faces of Delta_{N+1} seen from the cusp, with the innermost hexagon at
    ``(-1, 0, zeta, 1, 0, -zeta)`` and P3 the outer vertex over (zeta, 1).

    The face over (0, zeta) has the closed form
    ``(1/|zeta-1|, |zeta|/|zeta-1|, 0)``; the faces over (zeta, 1) and
    (1, 0) are solved directly.
    """
    bk = backend_for((zeta, P3))
    one = bk.real(1)
    if abs(zeta.imag) <= 1e-15 * max(1.0, abs(zeta)):
        raise FaceOrientationError("degenerate core parameter")
    a, d = abs(zeta), abs(zeta - 1)
    v_inf = horoball_vector(np.inf, one)
    v0 = horoball_vector(0 * zeta, a)
    vz = horoball_vector(zeta, a * d)
    vmz = horoball_vector(-zeta, a * d)
    v1 = horoball_vector(one, d)
    vm1 = horoball_vector(-one, d)
    vP3 = horoball_vector(P3, abs(P3 - zeta) * abs(P3 - 1))
    alpha, beta = 1 / d, a / d
    coef, lam = solve_face((v_inf, v0, vz), v1, vm1)
    gap = a + 1 - d
    out = [FaceCertificate(
        face_id="extra-0", alpha=float(alpha), beta=float(beta), gamma=0.0,
        lam=float(lam), margin=float(alpha + beta - 1), z_value=float(gap),
        method="boundary-whitehead", margin_z=float(gap / d),
        margin_dense=float(sum(coef) - 1))]
    for fid, fv, P, Q in (("extra-1", (v_inf, vz, v1), v0, vP3),
                          ("extra-2", (v_inf, v1, v0), vz, vmz)):
        coef, lam = solve_face(fv, P, Q)
        m = sum(coef) - 1
        out.append(FaceCertificate(
            face_id=fid, alpha=float(coef[0]), beta=float(coef[1]),
            gamma=float(coef[2]), lam=float(lam), margin=float(m),
            z_value=float(m), method="boundary-whitehead", margin_z=float(m),
            margin_dense=float(m)))
    return out


def _pinch_core_angles(letter, a):
    """Angles of Delta_{N+1} at 0, eta_N and xi_N from its triple (c, pi-b, b-c)."""
    c, pb, bc = a
    return (pb, c, bc) if letter == "R" else (pb, bc, c)


def solve(s, precision=None, dps=EXTENDED_DPS, tol=GRAD_TOL, max_iter=MAX_ITER,
          margin_floor=None, holonomy_tol=HOLONOMY_TOL):
    """
    Complete hyperbolic structure and canonicity certificate of the
    filling along s.

    Parameters
    ----------
    s : FillingSlope or (k, l)
    precision : {'double', 'extended', 'auto'}, optional
        See `resolve_precision`; N counts the layers of the solid torus.

    Returns
    -------
    WhiteheadResult

    Raises
    ------
    GateError
        For the six exceptional slopes.
    ConvergenceError
        When the ascent hits its iteration cap.
    """
    S = setup(s)
    prob, K = _joint_problem(S)
    u0 = _start(S, prob, S.theta_mid)
    extended = resolve_precision(precision, S.path.N) == "extended"
    try:
        u, _, gn, it = ascent(prob, u0, tol=max(tol, PRESOLVE_TOL) if extended else tol,
                              max_iter=max_iter)
    except ConvergenceError as e:
        # same escalation as volume.maximize
        if extended or _requested_precision(precision) != "auto" or e.u is None:
            raise
        u, it, extended = e.u, e.iterations, True
    if not S.theta_range[0] < u[0] < S.theta_range[1]:
        raise ConvergenceError(f"theta* = {u[0]!r} left the feasible interval")
    zx, xdps = None, None
    if extended:
        xdps = dps
        ux, _ = _ascent_extended(prob, u, dps=dps)
        u = np.array([float(v) for v in ux])
        with mp.workdps(dps):
            zx = _zs(S, ux, K)
    z = [float(v) for v in _zs(S, list(u), K)]
    return evaluate(S, z, zx, xdps, margin_floor=margin_floor,
                    holonomy_tol=holonomy_tol, iterations=it)


def evaluate(s, z, z_exact=None, dps=None, margin_floor=None,
             holonomy_tol=HOLONOMY_TOL, iterations=0):
    """
    Certificate at a given point, without optimizing.

    ``z`` (and ``z_exact``, mpmath strings or numbers at ``dps`` digits)
    use the layout of `WhiteheadResult.z`; theta is ``z[1]``.
    """
    S = s if isinstance(s, WhiteheadSetup) else setup(s)
    prob, K = _joint_problem(S)
    u = np.array([z[1]] + list(z[2:K + 1]), dtype=float)
    gn = float(np.max(np.abs(prob.gradient(u))))
    if margin_floor is None:
        margin_floor = default_floor(dps if z_exact is not None else None)
    volume = prob.value(u)
    angles = prob.angles(u).reshape(-1, 3)
    ctx = mp.workdps(dps) if z_exact is not None else nullcontext()
    with ctx:
        if z_exact is not None:
            z_exact = [mp.mpf(v) for v in z_exact]
            uu = [z_exact[1]] + list(z_exact[2:K + 1])
        else:
            uu = list(u)
        if S.parity == "odd":
            zt = z_exact if z_exact is not None else np.asarray(z, dtype=float)
            parts = _certify_odd(S, zt, margin_floor, holonomy_tol)
        else:
            parts = _certify_even(S, prob, uu, margin_floor, holonomy_tol)
    faces, bfaces, hol, hand, failures, dev = parts
    verdict = _verdict(faces + bfaces, failures, margin_floor)
    return WhiteheadResult(S, float(z[1]), np.asarray(z, dtype=float), volume,
                           angles, faces, bfaces, hol, hand, verdict, failures,
                           margin_floor, gn, iterations, z_exact,
                           dps if z_exact is not None else None, dev)


def _check_faces(faces, floor, failures):
    for f in faces:
        if f.margin < -floor or not 0.0 < f.lam < 1.0:
            failures.append(f.face_id)


def _boundary(S, dev, failures, last_angles=None):
    try:
        faces, square = _boundary_faces(S, dev, last_angles)
    except FaceOrientationError:
        failures.append("boundary")
        return [], float("inf")
    return faces, square


def _boundary_faces(S, dev, last_angles=None):
    diag = (Slope(1, 1), Slope(-1, 1))
    zeta, square = odd_boundary_zeta(dev.layers[0], S.path.r, diag)
    faces = [odd_boundary_face(zeta)]
    if S.parity == "even":
        N = S.path.N
        zeta = dev.layers[N].points[2]
        x, y, w = last_angles
        P3 = zeta + (1 - zeta) / _shape_at(y, w, x)
        faces += even_core_faces(zeta, P3)
    return faces, square


def certify_boundary_faces(result):
    """
    Faces glued across the boundary of Y and, in the even case, the faces
    of Delta_{N+1}.

    Raises
    ------
    FaceOrientationError
        For a degenerate (real) boundary parameter.
    """
    S = result.setup
    ctx = mp.workdps(result.dps) if result.dps else nullcontext()
    with ctx:
        last = None
        if S.parity == "even":
            N = S.path.N
            if result.z_exact is not None:
                last = _exact_rows(S, result.z_exact)[N - 1]
            else:
                last = result.angles[N - 1]
        faces, _ = _boundary_faces(S, result.development, last)
    return faces


def _certify_odd(S, z, floor, holonomy_tol):
    b = BoundaryAngles(*theta_triple(S.pqr, float(z[1])))
    cert = certify(S.path, z, b=b, margin_floor=floor, holonomy_tol=holonomy_tol,
                   dps=mp.mp.dps if backend_for(z) is EXTENDED else None)
    failures = list(cert.offending)
    bfaces, square = _boundary(S, cert.development, failures)
    _check_faces(bfaces, floor, failures)
    h = cert.holonomy
    hol = {"shape_product": h.shape_product, "angle_sum": h.angle_sum,
           "meridian": h.meridian, "deck": h.deck, "notch": h.notch,
           "square": square}
    if not square < holonomy_tol and "holonomy" not in failures:
        failures.append("holonomy")
    return (cert.all_faces, bfaces, hol, cert.handedness, failures,
            cert.development)


def _exact_rows(S, u, prob=None):
    """Tetrahedron angles in mpmath from multiprecision joint variables."""
    if prob is None:
        prob, _ = _joint_problem(S)
    g0 = prob.exact_g()
    M = prob.M
    flat = [g0[k] + mp.fsum(float(M[k, j]) * u[j] for j in np.flatnonzero(M[k]))
            for k in range(M.shape[0])]
    return [flat[3 * i:3 * i + 3] for i in range(len(flat) // 3)]


def _certify_even(S, prob, u, floor, holonomy_tol):
    path = S.path
    N = path.N
    bk = backend_for(u)
    failures = []
    rows = _exact_rows(S, u, prob) if bk is EXTENDED else \
        prob.angles(np.asarray(u, float)).reshape(-1, 3)
    if any(v <= 0 or v >= bk.pi for row in rows for v in row):
        failures.append("angles")
    core_angles = _pinch_core_angles(path.word[N - 1], rows[N])
    dev = hexagon_chain(path, rows[:N], core="pinch", core_angles=core_angles)
    faces = []
    for i in range(1, N):
        try:
            faces.append(face_convexity(dev.layers[i]))
        except FaceOrientationError:
            failures.append(f"interior-{i}")
    hand = handedness_check(dev, range(1, N))
    failures += [f"handedness-{i}" for i in hand.mismatches()]
    bfaces, square = _boundary(S, dev, failures, rows[N - 1])
    _check_faces(faces + bfaces, floor, failures)
    hol = {"notch": float(dev.max_notch_residual), "deck": _deck_consistency(dev),
           "square": square}
    if not max(hol.values()) < holonomy_tol:
        failures.append("holonomy")
    return faces, bfaces, hol, hand, failures, dev
