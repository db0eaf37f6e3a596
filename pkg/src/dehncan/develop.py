"""
Development of the cusp link and holonomy checks.

The cusp link of the layered solid torus is a nested family of centrally
symmetric hexagons H_0, ..., H_{N-1} centred at 0. H_i is stored through a
counterclockwise triple ``(u1, u2, u3)``; the full hexagon is
``(u1, u2, u3, -u1, -u2, -u3)``. For 1 <= i the triple is
``(xi_i, zeta'_i, eta_i)``.

Starting from the innermost (collapsed) hexagon, each tetrahedron
contributes an ear that produces the next hexagon outward. Every layer is
rescaled by a complex factor so that its distinguished vertex sits at -1;
frames are related by the stored factors.

Deck transformations
--------------------
For a counterclockwise consecutive triple ``(u1, u2, u3)`` of a hexagon,
``g(u) = -u1 + K / (u - u1)`` with ``K = (u3 + u1)(u2 - u1)`` sends u1 to
infinity, infinity to -u1 and u2 to u3. At a complete structure the map
attached to a vertex does not depend on the layer used to compute it.
"""
from dataclasses import dataclass, field

import numpy as np

from ._num import DOUBLE, backend_for
from .angles import tet_angles, edge_classes

__all__ = [
    "tet_shape",
    "HexLayer",
    "Development",
    "hexagon_chain",
    "develop_torus",
    "horoball_vectors",
    "edge_vectors",
    "horoball_vector",
    "lorentz",
    "deck_map",
    "mobius_apply",
    "handedness",
    "meridian_residual",
    "holonomy_check",
    "HolonomyReport",
    "edge_shape_residuals",
]


def tet_shape(x, y, z):
    """Shape parameter at the x-edge: argument x, modulus sin y / sin z."""
    bk = backend_for((x, y, z))
    # sines of angles close to pi are taken from the sum of the other two
    sx = bk.sin(min(x, y + z))
    sy = bk.sin(min(y, x + z))
    sz = bk.sin(min(z, x + y))
    return sy / sz * bk.cplx(bk.cos(x), sx)


def _shape_at(angle, nxt, nxt2):
    # vertex with the given angle in a ccw triangle whose next vertices have
    # angles nxt, nxt2
    return tet_shape(angle, nxt, nxt2)


# 2x2 matrices are nested tuples so that both backends share the code

def _mat_mul(G, H):
    (a, b), (c, d) = G
    (e, f), (g, h) = H
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _mat_det(G):
    (a, b), (c, d) = G
    return a * d - b * c


def _mat_scale(G, s):
    (a, b), (c, d) = G
    return ((a * s, b * s), (c * s, d * s))


def _sl2(G):
    bk = backend_for([G[0][0], G[0][1], G[1][0], G[1][1]])
    return _mat_scale(G, 1 / bk.csqrt(_mat_det(G)))


def _mat_dist_pm(G, H):
    """max-entry distance between G and +-H."""
    plus = max(abs(G[i][j] - H[i][j]) for i in range(2) for j in range(2))
    minus = max(abs(G[i][j] + H[i][j]) for i in range(2) for j in range(2))
    return float(min(plus, minus))


def deck_map(u1, u2, u3):
    """SL2-normalized matrix (nested tuples) of the deck map of the ccw triple."""
    K = (u3 + u1) * (u2 - u1)
    return _sl2(((-u1, K + u1 * u1), (1, -u1)))


def mobius_apply(G, u):
    (a, b), (c, d) = G
    if u == np.inf:
        return np.inf if c == 0 else a / c
    den = c * u + d
    return np.inf if den == 0 else (a * u + b) / den


def handedness(G):
    """(Tr G)^2 / det G."""
    return (G[0][0] + G[1][1]) ** 2 / _mat_det(G)


def _pm_identity_residual(G):
    return _mat_dist_pm(_sl2(G), ((1, 0), (0, 1)))


def edge_vectors(zeta, zeta_p):
    """
    Edge vectors with chosen arguments.

    Returns ``((a, A), (b, B), (c, C))`` for ``zeta + 1``, ``zeta' - zeta``
    and ``1 - zeta'``: B is the smallest positive argument and A, C are
    taken in (B - pi, B].
    """
    bk = backend_for((zeta, zeta_p))
    va, vb, vc = zeta + 1, zeta_p - zeta, 1 - zeta_p
    B = bk.arg(vb)
    if B <= 0:
        B += 2 * bk.pi

    def near(v):
        t = bk.arg(v)
        while t > B:
            t -= 2 * bk.pi
        while t <= B - bk.pi:
            t += 2 * bk.pi
        return t

    return ((abs(va), near(va)), (abs(vb), B), (abs(vc), near(vc)))


@dataclass
class HexLayer:
    """
    One hexagon of the cusp link in its own frame.

    ``points`` and ``labels`` list the six vertices counterclockwise.
    ``a_index`` is the position of the distinguished vertex (the vertex
    shared by T_{i-1}, T_i, T_{i+1}); ``letter`` is the turn at T_i.

    The normalized picture puts the distinguished vertex at -1 and reads
    ``(-1, zeta, zeta', 1, -zeta, -zeta')`` counterclockwise; for a right
    turn the picture is reflected first (``mirrored``).
    """

    index: int
    points: tuple
    labels: tuple
    a_index: int
    letter: str
    kind: str = "hexagon"

    @property
    def mirrored(self):
        return self.letter == "R"

    def normalized(self):
        """(zeta, zeta') of the normalized picture."""
        P = self.points
        k = self.a_index
        if self.letter == "L":
            u1, u2, u3 = P[k], P[(k + 1) % 6], P[(k + 2) % 6]
        else:
            u1, u2, u3 = P[k], P[(k - 1) % 6], P[(k - 2) % 6]
        s = -u1
        zeta, zetap = u2 / s, u3 / s
        if self.mirrored:
            zeta, zetap = zeta.conjugate(), zetap.conjugate()
        return zeta, zetap

    @property
    def zeta(self):
        return self.normalized()[0]

    @property
    def zeta_p(self):
        return self.normalized()[1]

    @property
    def vertices(self):
        z, zp = self.normalized()
        return (-1 + 0 * z, z, zp, 1 + 0 * z, -z, -zp)

    def edges(self):
        """Edge vectors of the normalized picture; see `edge_vectors`."""
        return edge_vectors(*self.normalized())

    def deck(self, k):
        """Deck map attached to vertex k (ccw rule)."""
        P = self.points
        return deck_map(P[k], P[(k + 1) % 6], P[(k + 2) % 6])

    def handedness(self):
        return handedness(self.deck(self.a_index))


def _hexagon(u1, u2, u3):
    return (u1, u2, u3, -u1, -u2, -u3)


@dataclass
class Development:
    """
    Developed cusp link.

    ``layers[i]`` is H_i. ``scale[i]`` maps frame i+1 to frame i:
    ``u_i = scale[i] * u_{i+1}``. ``notch_residual[i]`` compares the
    realized shape of tetrahedron i in H_i with its angles.
    """

    layers: list
    scale: list
    notch_residual: dict = field(default_factory=dict)
    ear_residual: dict = field(default_factory=dict)
    core: str = "fold"

    @property
    def max_notch_residual(self):
        return max(self.notch_residual.values(), default=0.0)

    def frame_factor(self, src, dst):
        """Factor c with ``u_dst = c * u_src`` (dst <= src)."""
        c = 1
        for i in range(dst, src):
            c *= self.scale[i]
        return c


def _renorm(points, k):
    """Scale so that points[k] becomes -1."""
    mu = -1.0 / points[k]
    return tuple(mu * p for p in points), mu


def hexagon_chain(path, angles, core="fold", core_angles=None):
    """
    Develop the nested hexagons from the core outward.

    Parameters
    ----------
    path : FareyPath
    angles : (K, 3) array
        Angles (x_i, y_i, z_i) of tetrahedra 1..K. ``K = N - 1`` for the
        folded core and ``K = N`` for the pinched core.
    core : {'fold', 'pinch'}
        'fold' collapses H_{N-1} (torus and odd Whitehead case); 'pinch'
        identifies the two reflex vertices of H_N at 0 (even Whitehead case).
    core_angles : tuple, optional
        For 'pinch': angles of the core tetrahedron at 0, at eta_N and at
        xi_N.

    Returns
    -------
    Development
    """
    bk = backend_for([v for row in angles for v in row])
    if bk is DOUBLE:
        angles = np.asarray(angles, dtype=float)
    one = bk.cplx(1)
    N = path.N
    word = path.word + (path.word[-1] if core == "pinch" else "")
    K = len(angles)
    if core == "fold":
        if K != N - 1:
            raise ValueError("fold core needs N-1 tetrahedra")
        top = N - 1
        x, y, z = angles[top - 1]
        if word[top] == "R":
            P1, Q = -one, one
            P2 = P1 + (Q - P1) / tet_shape(x, y, z)
        else:
            Q, P2 = one, -one
            P1 = Q + (P2 - Q) / _shape_at(z, x, y)
    elif core == "pinch":
        if K != N:
            raise ValueError("pinch core needs N tetrahedra")
        top = N
        a0, a_eta, a_xi = core_angles
        P1, Q = -one, 0 * one
        # triangle (0, zeta, 1) ccw with angles (a0, a_eta, a_xi)
        P2 = 1 / _shape_at(a0, a_eta, a_xi)
    else:
        raise ValueError(f"unknown core {core!r}")

    labels_top = (path.right[top], path.new[top], path.left[top])
    triples = {top: ((P1, Q, P2), labels_top)}
    notch = {}
    scale = [None] * (top + 1)
    cur, cur_lab = (P1, Q, P2), labels_top
    for i in range(top, 0, -1):
        P1, Q, P2 = cur
        x, y, z = angles[i - 1]
        if i < top or core == "pinch":
            realized = (Q - P1) / (P2 - P1)
            notch[i] = abs(realized / tet_shape(x, y, z) - 1)
        P3 = P2 + (-P1 - P2) / _shape_at(y, z, x)
        xi, _, eta = cur_lab
        if i - 1 == 0:
            new, lab = (P1, P2, P3), (xi, eta, path.r)
        elif word[i - 1] == "R":
            new, lab = (P1, P2, P3), (xi, eta, path.left[i - 1])
        else:
            new, lab = (P3, -P1, -P2), (path.right[i - 1], xi, eta)
        # renormalize the outer layer so that its first entry sits at -1
        new, mu = _renorm(new, 0)
        scale[i - 1] = mu
        triples[i - 1] = (new, lab)
        cur, cur_lab = new, lab
    scale = scale[:top]

    layers = []
    for i in range(top + 1):
        (u1, u2, u3), lab = triples[i]
        pts = _hexagon(u1, u2, u3)
        labs = lab + lab
        if i == 0:
            a_lab = path.p
            letter = path.word[0]
        else:
            a_lab = path.right[i] if word[i] == "R" else path.left[i]
            letter = word[i]
        a_idx = labs.index(a_lab)
        kind = "hexagon"
        if i == top:
            kind = "collapsed" if core == "fold" else "pinched"
        layers.append(HexLayer(i, pts, labs, a_idx, letter, kind))
    return Development(layers, scale, notch, core=core)


def develop_torus(path, z):
    """Development of the layered solid torus at the angle structure z."""
    return hexagon_chain(path, tet_angles(path, z), core="fold")


def lorentz(v, w):
    """Minkowski product x x' + y y' + z z' - t t'."""
    return v[0] * w[0] + v[1] * w[1] + v[2] * w[2] - v[3] * w[3]


def horoball_vector(u, diameter):
    """
    Isotropic vector of the horoball of given Euclidean diameter at u.

    For u = inf the second argument is the height h of the horosphere and
    the vector is ``(0, 0, -h, h)``, so that ``<v_inf | v_u> = -2 h / d``.
    """
    if u is np.inf or (not hasattr(u, "imag") and u == np.inf):
        return [0 * diameter, 0 * diameter, -diameter, diameter]
    n2 = abs(u) ** 2
    return [2 * u.real / diameter, 2 * u.imag / diameter,
            (1 - n2) / diameter, (1 + n2) / diameter]


def horoball_vectors(zeta, zeta_p):
    """
    Vectors for -1, 1, zeta, zeta', inf in a normalized hexagon picture.

    The horoball at infinity has height 1 and the horoball at a hexagon
    vertex has diameter equal to the product of the two adjacent edge
    lengths.
    """
    (a, _), (b, _), (c, _) = edge_vectors(zeta, zeta_p)
    return {
        "inf": horoball_vector(np.inf, 1 + 0 * a),
        "-1": horoball_vector(-1.0, a * c),
        "1": horoball_vector(1.0, a * c),
        "zeta": horoball_vector(zeta, a * b),
        "zeta'": horoball_vector(zeta_p, b * c),
    }


def _layer_point_index(layer, target, tol=1e-7):
    d = [abs(p - target) for p in layer.points]
    k = min(range(len(d)), key=d.__getitem__)
    if d[k] > tol * max(1.0, abs(target)):
        raise ValueError("tracked vertex not found in layer")
    return k


@dataclass
class HolonomyReport:
    shape_product: float
    angle_sum: float
    meridian: float
    deck: float
    notch: float

    @property
    def max_residual(self):
        return max(self.shape_product, self.angle_sum, self.meridian,
                   self.deck, self.notch)


def edge_shape_residuals(path, z):
    """
    Residuals of the interior edge equations.

    Returns
    -------
    shape : float
        max over interior edge classes of ``|prod w - 1|``.
    angle : float
        max over interior edge classes of ``|sum angles - 2 pi|``.

    Outside the open angle polytope the shapes are undefined and ``shape``
    is infinite.
    """
    ang = tet_angles(path, z)
    bk = backend_for([v for row in ang for v in row])
    degenerate = any(v <= 0 or v >= bk.pi for row in ang for v in row)
    rep = edge_classes(path)
    boundary = {rep[path.p], rep[path.q], rep[path.r]}
    logmod, asum = {}, {}
    for i in range(1, path.N):
        x, y, w = ang[i - 1]
        if degenerate:
            lx = ly = lz = 0.0
        else:
            sx = bk.log(bk.sin(min(x, y + w)))
            sy = bk.log(bk.sin(min(y, x + w)))
            sw = bk.log(bk.sin(min(w, x + y)))
            lx, ly, lz = sy - sw, sw - sx, sx - sy
        for lab, lm, a in ((path.right[i], 2 * lx, 2 * x),
                           (path.left[i], 2 * ly, 2 * y),
                           (path.dropped(i), lz, w),
                           (path.new[i], lz, w)):
            k = rep[lab]
            logmod[k] = logmod.get(k, 0) + lm
            asum[k] = asum.get(k, 0) + a
    shape, angle = (float("inf") if degenerate else 0.0), 0.0
    for k in asum:
        if k in boundary:
            continue
        angle = max(angle, float(abs(asum[k] - 2 * bk.pi)))
        if degenerate:
            continue
        err = bk.cplx(logmod[k], asum[k] - 2 * bk.pi)
        shape = max(shape, float(abs(bk.exp(err) - 1)))
    return shape, angle


def _deck_consistency(dev):
    """Compare deck maps of shared vertices across consecutive layers."""
    worst = 0.0
    L = dev.layers
    for i in range(len(L) - 1, 0, -1):
        inner, outer = L[i], L[i - 1]
        mu = dev.scale[i - 1]
        for k in range(6):
            lab = inner.labels[k]
            if lab not in outer.labels:
                continue
            if inner.kind != "hexagon" and k % 3 == 1:
                continue
            target = mu * inner.points[k]
            try:
                ko = _layer_point_index(outer, target)
            except ValueError:
                continue
            (ga, gb), (gc, gd) = inner.deck(k)
            # conjugate by u -> mu u
            Gi = _sl2(((ga, gb * mu), (gc / mu, gd)))
            worst = max(worst, _mat_dist_pm(Gi, outer.deck(ko)))
    return worst


def meridian_residual(dev):
    """
    Distance of the meridian holonomy from +-identity.

    The meridian is the product of the deck map of the core's reflex vertex
    with that of the distinguished core vertex, the latter taken from the
    outermost layer containing it.
    """
    top = len(dev.layers) - 1
    core = dev.layers[top]
    P = core.points
    ka = core.a_index
    a_lab = core.labels[ka]
    j = min(i for i, L in enumerate(dev.layers) if a_lab in L.labels)
    c = dev.frame_factor(top, j)
    outer = dev.layers[j]
    ko = _layer_point_index(outer, c * P[ka])
    Ga = outer.deck(ko)
    kd = 1
    Gd = deck_map(c * P[kd], c * P[kd + 1], c * P[(kd + 2) % 6])
    return _pm_identity_residual(_mat_mul(Ga, Gd))


def holonomy_check(path, z):
    """
    Completeness residuals at the angle structure z.

    Returns
    -------
    HolonomyReport
        ``shape_product`` and ``angle_sum`` come from the edge equations,
        ``meridian`` from the deck maps, ``deck`` compares deck maps across
        layers and ``notch`` compares developed and prescribed shapes.
    """
    shape, angle = edge_shape_residuals(path, z)
    dev = develop_torus(path, z)
    return HolonomyReport(shape, angle, meridian_residual(dev),
                          _deck_consistency(dev), dev.max_notch_residual)
