"""
Exact Farey-graph combinatorics.

Slopes are elements of P^1(Q) stored as reduced integer pairs. A slope
``num/den`` is identified with the primitive vector ``(den, num)``, and the
wedge of two slopes is the absolute value of the 2x2 determinant.

The circle P^1(R) is oriented so that 0, 1, inf lie counterclockwise.

Path conventions
----------------
For the Farey triangles T_0, ..., T_N met by the geodesic from r to m,
``e_i = T_{i-1} & T_i`` has a right end ``xi_i`` and a left end ``eta_i``
(with respect to the direction of travel), and ``new[i]`` is the vertex of
T_i that is not on e_i. Counterclockwise, T_i reads
``(right[i], new[i], left[i])``. The letter at T_i is ``R`` when e_i and
e_{i+1} share their right end.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
import re

__all__ = [
    "Slope",
    "FareyTriangle",
    "FareyPath",
    "FareyError",
    "make_slope",
    "parse_slope",
    "wedge",
    "is_ccw",
    "farey_path",
    "syllables",
    "continued_fraction",
    "word_cf_roundtrip",
    "path_from_word",
]


class FareyError(ValueError):
    """Invalid slope or Farey configuration."""


@dataclass(frozen=True)
class Slope:
    num: int
    den: int

    def __post_init__(self):
        if not isinstance(self.num, int) or not isinstance(self.den, int):
            raise FareyError("slope entries must be integers")
        if self.num == 0 and self.den == 0:
            raise FareyError("0/0 is not a slope")
        if self.den < 0 or gcd(self.num, self.den) != 1:
            raise FareyError(f"non-canonical slope {self.num}/{self.den}")
        if self.den == 0 and self.num != 1:
            raise FareyError("infinity must be stored as 1/0")

    @property
    def is_inf(self):
        return self.den == 0

    @property
    def vector(self):
        return (self.den, self.num)

    def key(self):
        # total order along R, with infinity last
        return (1, Fraction(0)) if self.den == 0 else (0, Fraction(self.num, self.den))

    def __float__(self):
        return float("inf") if self.den == 0 else self.num / self.den

    def __str__(self):
        if self.den == 0:
            return "inf"
        if self.den == 1:
            return str(self.num)
        return f"{self.num}/{self.den}"

    def __repr__(self):
        return f"Slope({self})"


def make_slope(num, den=1):
    """Reduced canonical slope num/den (den >= 0, infinity is 1/0)."""
    num, den = int(num), int(den)
    if num == 0 and den == 0:
        raise FareyError("0/0 is not a slope")
    g = gcd(num, den)
    num, den = num // g, den // g
    if den < 0 or (den == 0 and num < 0):
        num, den = -num, -den
    return Slope(num, den)


_SLOPE_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*([+-]?\d+)\s*)?$")


def parse_slope(text):
    """Parse ``"a/b"``, ``"a"`` or ``"inf"``."""
    if isinstance(text, Slope):
        return text
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "oo", "1/0", "∞"):
        return Slope(1, 0)
    mo = _SLOPE_RE.match(s)
    if mo is None:
        raise FareyError(f"cannot parse slope {text!r}")
    num = int(mo.group(1))
    den = int(mo.group(2)) if mo.group(2) is not None else 1
    return make_slope(num, den)


def wedge(a, b):
    """|y x' - y' x| for slopes y/x and y'/x'."""
    return abs(a.num * b.den - b.num * a.den)


def is_ccw(a, b, c):
    """True if the distinct slopes a, b, c are met in this counterclockwise order."""
    ka, kb, kc = a.key(), b.key(), c.key()
    if ka == kb or kb == kc or ka == kc:
        raise FareyError("orientation of coincident slopes")
    return (ka < kb < kc) or (kb < kc < ka) or (kc < ka < kb)


def _slope_of(v):
    x, y = v
    return make_slope(y, x)


def _add(u, v):
    return (u[0] + v[0], u[1] + v[1])


def _det(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class FareyTriangle:
    vertices: tuple

    def __post_init__(self):
        a, b, c = self.vertices
        if not (wedge(a, b) == wedge(b, c) == wedge(c, a) == 1):
            raise FareyError(f"{a}, {b}, {c} is not a Farey triangle")

    def __contains__(self, s):
        return s in self.vertices

    def same_as(self, other):
        return set(self.vertices) == set(other.vertices)


@dataclass(frozen=True)
class FareyPath:
    """
    Farey triangles crossed by the geodesic from r to m.

    ``word[0]`` is the artificial letter (equal to ``word[1]``) and
    ``hinge[i]`` is meaningful for ``1 <= i <= N-1``; ``hinge[0]`` is
    always False. ``right``, ``left`` are indexed 1..N (entry 0 unused) and
    ``new`` is indexed 0..N with ``new[0] == q``. The stored ``p``, ``q``
    are in path order, i.e. already swapped when ``pq_swapped`` is set.
    """

    p: Slope
    q: Slope
    r: Slope
    m: Slope
    triangles: tuple
    word: str
    hinge: tuple
    pq_swapped: bool
    right: tuple = field(repr=False)
    left: tuple = field(repr=False)
    new: tuple = field(repr=False)

    @property
    def N(self):
        return len(self.triangles) - 1

    def dropped(self, i):
        """Vertex of T_{i-1} not on e_i (the vertex left behind at step i)."""
        if i == 1:
            return self.r
        return self.left[i - 1] if self.word[i - 1] == "R" else self.right[i - 1]

    def common(self, i):
        """End of e_i that is kept at T_i (shared with e_{i+1})."""
        return self.right[i] if self.word[i] == "R" else self.left[i]


def _walk(u, v, coeffs, stop_at_one=True):
    """Mediant descent from the edge (u, v); coeffs = (A, B) with m = A u + B v."""
    A, B = coeffs
    rights, lefts, news, letters = [u], [v], [], []
    while True:
        w = _add(u, v)
        news.append(w)
        if A == B:
            break
        if A > B:
            letters.append("R")
            A, v = A - B, w
        else:
            letters.append("L")
            B, u = B - A, w
        rights.append(u)
        lefts.append(v)
    return rights, lefts, news, letters


def farey_path(p, q, r, m, allow_short=False):
    """
    Farey path from the triangle pqr to the slope m.

    Parameters
    ----------
    p, q, r : Slope
        Vertices of a Farey triangle; the edge pq must separate r from m.
    m : Slope
        Target slope.
    allow_short : bool
        Accept N = 1 (pqm a Farey triangle). Used by the even Whitehead
        variant.

    Returns
    -------
    FareyPath
        p and q are swapped, if needed, so that the artificial first turn
        keeps p (the geodesic enters T_0 through pr).
    """
    p, q, r, m = (parse_slope(s) for s in (p, q, r, m))
    FareyTriangle((p, q, r))
    if m in (p, q, r):
        raise FareyError("m must differ from p, q, r")
    vp, vq = p.vector, q.vector
    vr = r.vector
    # sign vq so that r ~ vp + vq
    if abs(_det(_add(vp, vq), vr)) != 0:
        vq = (-vq[0], -vq[1])
    d = _det(vp, vq)
    vm = m.vector
    alpha = _det(vm, vq) * d
    beta = _det(vp, vm) * d
    if alpha * beta >= 0:
        raise FareyError(f"edge {p}{q} does not separate {r} from {m}")
    # r' = vp - vq; write m in the basis (vp, -vq) with positive coefficients
    A, B = abs(alpha), abs(beta)
    u, v = vp, (-vq[0], -vq[1])
    # right/left ends of e_1: ccw order of T_0 is (right, left, r)
    if is_ccw(p, q, r):
        rights, lefts, news, letters = _walk(u, v, (A, B))
        p_is_right = True
    else:
        rights, lefts, news, letters = _walk(v, u, (B, A))
        p_is_right = False
    N = len(news)
    if N < 2 and not allow_short:
        raise FareyError(f"{p}{q}{m} is a Farey triangle (N < 2)")
    if N >= 2:
        first = letters[0]
    else:
        # no real turn; keep the input order (the artificial letter keeps p)
        first = "R" if p_is_right else "L"
    word = first + "".join(letters)
    swapped = (first == "R") != p_is_right
    if swapped:
        p, q = q, p
    R = [None] + [_slope_of(x) for x in rights]
    Lf = [None] + [_slope_of(x) for x in lefts]
    new = [q] + [_slope_of(x) for x in news]
    if new[-1] != m:
        raise FareyError("internal: path does not reach m")
    tris = [FareyTriangle((R[1], Lf[1], r))]
    for i in range(1, N + 1):
        tris.append(FareyTriangle((R[i], new[i], Lf[i])))
    hinge = (False,) + tuple(word[i - 1] != word[i] for i in range(1, N))
    return FareyPath(p, q, r, m, tuple(tris), word, hinge, swapped,
                     tuple(R), tuple(Lf), tuple(new))


def syllables(word):
    """Run lengths of a word, e.g. 'RRLR' -> [2, 1, 1]."""
    out = []
    prev = None
    for ch in word:
        if ch == prev:
            out[-1] += 1
        else:
            out.append(1)
            prev = ch
    return out


def continued_fraction(num, den):
    """Euclidean continued fraction of num/den > 0, e.g. 5/2 -> [2, 2]."""
    if den <= 0 or num <= 0:
        raise ValueError("positive rational expected")
    out = []
    while den:
        a, rem = divmod(num, den)
        out.append(a)
        num, den = den, rem
    return out


def word_cf_roundtrip(m):
    """
    Continued-fraction coefficients read off the word of m.

    Uses the normalization (p, q, r) = (0, inf, -1), so m > 0. The syllables
    of the real letters, with the last syllable extended by one terminal
    letter, are the partial quotients of m (a leading zero quotient for
    m < 1 is dropped).
    """
    m = parse_slope(m)
    path = farey_path(Slope(0, 1), Slope(1, 0), Slope(-1, 1), m)
    return syllables(path.word[1:] + path.word[-1])


def path_from_word(word, p=None, q=None, r=None):
    """
    Slope m whose path from pqr realizes the real letters ``word``.

    ``word`` excludes the artificial letter. The default triangle is
    (0, inf, -1).
    """
    p = Slope(0, 1) if p is None else parse_slope(p)
    q = Slope(1, 0) if q is None else parse_slope(q)
    r = Slope(-1, 1) if r is None else parse_slope(r)
    FareyTriangle((p, q, r))
    vp, vq = p.vector, q.vector
    if _det(_add(vp, vq), r.vector) != 0:
        vq = (-vq[0], -vq[1])
    u, v = vp, (-vq[0], -vq[1])
    if not is_ccw(p, q, r):
        u, v = v, u
    for ch in word:
        w = _add(u, v)
        if ch == "R":
            v = w
        elif ch == "L":
            u = w
        else:
            raise FareyError(f"bad letter {ch!r}")
    return _slope_of(_add(u, v))
