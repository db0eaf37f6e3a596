"""Scalar backends: IEEE doubles or mpmath multiprecision."""
import cmath
import math

import mpmath as mp

__all__ = ["Backend", "DOUBLE", "backend_for", "is_mp", "EXTENDED_DPS"]

EXTENDED_DPS = 50


class Backend:
    """Elementary functions for one scalar type."""

    def __init__(self, name):
        self.name = name
        if name == "double":
            self.pi = math.pi
            self.sin, self.cos, self.log = math.sin, math.cos, math.log
            self.sqrt = math.sqrt
            self.csqrt = cmath.sqrt
            self.arg = cmath.phase
            self.real = float
            self.cplx = complex
        else:
            self.pi = mp.pi
            self.sin, self.cos, self.log = mp.sin, mp.cos, mp.log
            self.sqrt = mp.sqrt
            self.csqrt = mp.sqrt
            self.arg = mp.arg
            self.real = mp.mpf
            self.cplx = mp.mpc

    def expi(self, x):
        return self.cplx(self.cos(x), self.sin(x))

    def exp(self, w):
        return cmath.exp(w) if self.name == "double" else mp.exp(w)


DOUBLE = Backend("double")
EXTENDED = Backend("extended")


def is_mp(x):
    return isinstance(x, (mp.mpf, mp.mpc))


def backend_for(values):
    """EXTENDED if any entry is an mpmath number, else DOUBLE."""
    try:
        it = iter(values)
    except TypeError:
        it = iter([values])
    for v in it:
        if is_mp(v):
            return EXTENDED
    return DOUBLE
