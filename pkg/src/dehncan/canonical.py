"""
Epstein-Penner canonicity certificates for the layered solid torus.

Each horoball is encoded by an isotropic vector of Minkowski space
R^{3,1}. Two cells adjacent along a face are locally convex when the
segment joining the two opposite vertices P, Q passes beyond the face:
writing ``lambda P + (1 - lambda) Q = sum alpha_i A_i`` for the vectors A_i
of the face, convexity holds iff ``sum alpha_i > 1``. The certificates
record ``margin = sum alpha_i - 1``.

Interior faces use the hexagon picture ``(-1, zeta, zeta', 1, -zeta,
-zeta')`` of the pleated surface between two consecutive tetrahedra; the
core face uses the collapsed hexagon, a broken line ``(zeta, -1, 1,
-zeta)``. Coefficients come from closed forms and are cross-checked
against a dense linear solve.
"""
from contextlib import nullcontext
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from ._num import DOUBLE, EXTENDED, EXTENDED_DPS, backend_for
from .angles import tet_angles, residuals as angle_residuals
from .develop import (develop_torus, edge_vectors, horoball_vector,
                      horoball_vectors, edge_shape_residuals,
                      meridian_residual, _deck_consistency, HolonomyReport)
from .volume import VolumeResult, total_volume

__all__ = [
    "MARGIN_FLOOR",
    "HOLONOMY_TOL",
    "FaceCertificate",
    "FaceOrientationError",
    "solve_face",
    "face_convexity",
    "face_from_points",
    "core_zeta",
    "core_face_convexity",
    "HandednessEntry",
    "HandednessReport",
    "handedness_check",
    "CanonicityCertificate",
    "certify",
    "default_floor",
]

MARGIN_FLOOR = 1e-9
# floor used with multiprecision input: 15 digits above the working precision
EXTENDED_FLOOR_DIGITS = 15
HOLONOMY_TOL = 1e-8
HAND_TOL = 1e-12


class FaceOrientationError(ValueError):
    """The hexagon picture is not positively oriented (eta' <= eta)."""


@dataclass
class FaceCertificate:
    """
    Convexity certificate for one codimension-two face.

    ``margin`` is alpha + beta + gamma - 1 from the closed forms,
    ``margin_z`` the same quantity through the trigonometric form
    ``z_value`` and ``margin_dense`` the value from a generic linear solve.
    """

    face_id: str
    alpha: float
    beta: float
    gamma: float
    lam: float
    margin: float
    z_value: float
    method: str
    margin_z: float = float("nan")
    margin_dense: float = float("nan")

    def valid(self, floor=MARGIN_FLOOR):
        return self.margin > floor and 0.0 < self.lam < 1.0


def solve_face(face_vectors, P, Q):
    """
    Solve ``lambda P + (1 - lambda) Q = sum alpha_i A_i``.

    Parameters
    ----------
    face_vectors : sequence of (4,) arrays
        The vectors A_i.
    P, Q : (4,) arrays

    Returns
    -------
    alphas : ndarray
    lam : float
    """
    flat = [v for vec in list(face_vectors) + [P, Q] for v in vec]
    if backend_for(flat) is EXTENDED:
        cols = [list(v) for v in face_vectors] + [[q - p for p, q in zip(P, Q)]]
        A = mp.matrix([[col[r] for col in cols] for r in range(4)])
        sol = mp.lu_solve(A, mp.matrix(list(Q)))
        sol = [sol[i] for i in range(len(cols))]
        return sol[:-1], sol[-1]
    cols = [np.asarray(v, float) for v in face_vectors]
    P, Q = np.asarray(P, float), np.asarray(Q, float)
    A = np.column_stack(cols + [Q - P])
    sol, *_ = np.linalg.lstsq(A, Q, rcond=None)
    return list(sol[:-1]), float(sol[-1])


def face_from_points(zeta, zeta_p, face_id="face"):
    """
    Certificate for the interface whose hexagon is
    ``(-1, zeta, zeta', 1, -zeta, -zeta')``.

    Raises
    ------
    FaceOrientationError
        If ``Im zeta' <= Im zeta``.
    """
    bk = backend_for((zeta, zeta_p))
    if bk is DOUBLE:
        zeta, zeta_p = complex(zeta), complex(zeta_p)
    eta, etap = zeta.imag, zeta_p.imag
    d = etap - eta
    if not d > 0:
        raise FaceOrientationError(f"{face_id}: eta' - eta = {d!r} is not positive")
    (a, A), (b, B), (c, C) = edge_vectors(zeta, zeta_p)
    alpha = b * etap / (c * d)
    beta = -b * eta / (a * d)
    gamma = (etap * (1 - abs(zeta) ** 2) - eta * (1 - abs(zeta_p) ** 2)) / (a * c * d)
    # x-coordinates of the identity fix lambda
    lam = 0.5 + 0.25 * a * c * (2 * alpha * zeta.real / (a * b)
                                + 2 * beta * zeta_p.real / (b * c))
    Z = -4 * a * b * c * bk.sin((A + C) / 2) * bk.cos((B - A) / 2) * bk.cos((B - C) / 2)
    v = horoball_vectors(zeta, zeta_p)
    coef, _ = solve_face((v["zeta"], v["zeta'"], v["inf"]), v["1"], v["-1"])
    return FaceCertificate(
        face_id=face_id, alpha=float(alpha), beta=float(beta), gamma=float(gamma),
        lam=float(lam), margin=float(alpha + beta + gamma - 1), z_value=float(Z),
        method="interior", margin_z=float(Z / (a * c * d)),
        margin_dense=float(sum(coef) - 1))


def face_convexity(layer, face_id=None):
    """Certificate for the interface described by a developed hexagon layer."""
    if face_id is None:
        face_id = f"interior-{layer.index}"
    return face_from_points(*layer.normalized(), face_id=face_id)


def core_zeta(layer):
    """
    Broken-line parameter of a collapsed hexagon.

    The collapsed hexagon is rescaled to ``(zeta, -1, 1, -zeta)``, where
    the segment (-1, 1) passes through the centre.
    """
    P = layer.points
    k = min(range(6), key=lambda j: abs(P[(j + 1) % 6] + P[j]))
    return P[(k - 1) % 6] / (-P[k])


def core_face_convexity(zeta, face_id="core"):
    """
    Certificate for the self-glued face at the core of the solid torus.

    Raises
    ------
    ValueError
        For real zeta (degenerate core).
    """
    bk = backend_for((zeta,))
    if bk is DOUBLE:
        zeta = complex(zeta)
    if abs(zeta.imag) <= 1e-15 * max(1.0, abs(zeta)):
        raise ValueError("core parameter zeta must not be real")
    s = abs(zeta + 1)
    alpha = (abs(zeta) ** 2 - 1) / s**2
    beta = gamma = 1 / s
    gap = abs(zeta) ** 2 - (s - 1) ** 2
    w = 1 / (2 * s)
    v_inf = horoball_vector(np.inf, 1 + 0 * s)
    v1 = [2 * w, 0 * w, 0 * w, 2 * w]
    vm1 = [-2 * w, 0 * w, 0 * w, 2 * w]
    P = horoball_vector(zeta, s * s)
    Q = horoball_vector(-zeta, s * s)
    coef, _ = solve_face((v_inf, v1, vm1), P, Q)
    return FaceCertificate(
        face_id=face_id, alpha=float(alpha), beta=float(beta), gamma=float(gamma),
        lam=0.5, margin=float(alpha + beta + gamma - 1), z_value=float(gap),
        method="core", margin_z=float(gap / s**2), margin_dense=float(sum(coef) - 1))


@dataclass
class HandednessEntry:
    index: int
    letter: str
    hand: complex

    @property
    def classification(self):
        if self.hand.imag > HAND_TOL:
            return "left"
        if self.hand.imag < -HAND_TOL:
            return "right"
        return "ambiguous"

    @property
    def matches(self):
        return self.classification == {"L": "left", "R": "right"}[self.letter]


@dataclass
class HandednessReport:
    entries: list

    @property
    def ok(self):
        return all(e.matches for e in self.entries)

    def mismatches(self):
        return [e.index for e in self.entries if not e.matches]


def handedness_check(dev, indices=None):
    """
    Handedness of the deck map at the distinguished vertex of each layer.

    Layer i carries letter ``word[i]``; left turns must give
    ``Im(hand) > 0`` and right turns ``Im(hand) < 0``.
    """
    if indices is None:
        indices = range(1, len(dev.layers))
    out = []
    for i in indices:
        L = dev.layers[i]
        out.append(HandednessEntry(i, L.letter, complex(L.handedness())))
    return HandednessReport(out)


@dataclass
class CanonicityCertificate:
    faces: list
    core: FaceCertificate
    holonomy: HolonomyReport
    handedness: HandednessReport
    volume: float
    margin_floor: float = MARGIN_FLOOR
    verdict: str = "canonical"
    offending: list = field(default_factory=list)
    development: object = field(default=None, repr=False)

    @property
    def canonical(self):
        return self.verdict == "canonical"

    @property
    def all_faces(self):
        return list(self.faces) + ([self.core] if self.core is not None else [])

    @property
    def min_margin(self):
        m = [f.margin for f in self.all_faces]
        return min(m) if m else float("nan")


def default_floor(dps=None):
    """Margin floor for double (dps None) or multiprecision arithmetic."""
    return MARGIN_FLOOR if dps is None else 10.0 ** -(dps - EXTENDED_FLOOR_DIGITS)


def _verdict(faces, failures, floor):
    if failures:
        return "non-canonical"
    if any(not f.margin > floor for f in faces):
        return "indeterminate"
    return "canonical"


def certify(path, z, b=None, margin_floor=None, holonomy_tol=HOLONOMY_TOL, dps=None):
    """
    Canonicity certificate of the layered solid torus at the angle
    structure z.

    Parameters
    ----------
    path : FareyPath
    z : array_like, list of mpmath numbers, or VolumeResult
        A VolumeResult contributes its multiprecision maximizer when it
        has one; the whole check then runs at that precision.
    b : BoundaryAngles, optional
        If given, the pinned coordinates of z are checked as well.
    margin_floor : float, optional
        Defaults to MARGIN_FLOOR in double precision and to
        ``10**-(dps - EXTENDED_FLOOR_DIGITS)`` in extended precision.
    dps : int, optional
        Working precision for multiprecision z (default: that of the
        VolumeResult, else EXTENDED_DPS).

    Interior faces come from the hexagons H_1..H_{N-2} and the core face
    from the collapsed hexagon H_{N-1}. The verdict is 'canonical' when
    every margin exceeds the floor, every holonomy residual is below
    ``holonomy_tol`` and the handedness signs match the word;
    'indeterminate' when only near-flat faces (|margin| <= floor) prevent
    it; 'non-canonical' otherwise.
    """
    if isinstance(z, VolumeResult):
        z, dps = (z.z_exact, z.dps) if z.z_exact is not None else (z.z_star, None)
    if backend_for(z) is EXTENDED:
        dps = dps or EXTENDED_DPS
    else:
        dps = None
    if margin_floor is None:
        margin_floor = default_floor(dps)
    ctx = mp.workdps(dps) if dps else nullcontext()
    with ctx:
        return _certify(path, z, b, margin_floor, holonomy_tol)


def _certify(path, z, b, margin_floor, holonomy_tol):
    bk = backend_for(z)
    zf = np.array([float(v) for v in z])
    failures = []
    ang = tet_angles(path, z)
    flat = [v for row in ang for v in row]
    if any(v <= 0 or v >= bk.pi for v in flat):
        failures.append("angles")
    if b is not None and angle_residuals(path, zf, b).pinned > 1e-12:
        failures.append("pinned")
    shape, asum = edge_shape_residuals(path, z)
    dev = develop_torus(path, z)
    hol = HolonomyReport(shape, asum, meridian_residual(dev),
                         _deck_consistency(dev), float(dev.max_notch_residual))
    if not hol.max_residual < holonomy_tol:
        failures.append("holonomy")
    hand = handedness_check(dev)
    failures += [f"handedness-{i}" for i in hand.mismatches()]
    faces = []
    for i in range(1, path.N - 1):
        try:
            cert = face_convexity(dev.layers[i])
        except FaceOrientationError:
            failures.append(f"interior-{i}")
            continue
        faces.append(cert)
    core = None
    try:
        core = core_face_convexity(core_zeta(dev.layers[path.N - 1]))
    except ValueError:
        failures.append("core")
    for f in faces + ([core] if core else []):
        if f.margin < -margin_floor or not 0.0 < f.lam < 1.0:
            failures.append(f.face_id)
    verdict = _verdict(faces + ([core] if core else []), failures, margin_floor)
    return CanonicityCertificate(faces, core, hol, hand, total_volume(path, zf),
                                 margin_floor, verdict, failures, dev)
