"""Pythonic wrapper around the tower-float scalar kernels.

A Value is a positive real stored either as a plain IEEE double (used
whenever 2^-900 < x < 2^900, so desk-scale arithmetic is exact) or as
2^(+-tower), where the tower is an iterated power 2^2^...^2^g.  See
_kernels for the arithmetic and its error discipline.
"""

from __future__ import annotations

from . import _kernels as K


class Value:
    """Immutable positive real in plain/tower form."""

    __slots__ = ("d", "g", "s")

    def __init__(self, d: int, g: float, s: int):
        self.d = d
        self.g = g
        self.s = s

    # -- constructors ------------------------------------------------------

    @classmethod
    def of(cls, x) -> "Value":
        if isinstance(x, Value):
            return x
        if isinstance(x, int) and abs(x) >= 2 ** 53:
            # exact large integers enter through their bit length
            if x <= 0:
                raise ValueError("values are nonnegative")
            from math import log2
            return cls(*K.v_from_st(*K.st_from_float(log2(x))))
        return cls(*K.v_from_float(float(x)))

    @classmethod
    def from_triple(cls, d, g, s) -> "Value":
        return cls(int(d), float(g), int(s))

    @classmethod
    def pow2(cls, exponent: "Value | float", negate=False) -> "Value":
        """2^exponent (or 2^-exponent) for a tower-scale exponent."""
        if isinstance(exponent, Value):
            s, d, g = K.v_as_tower(exponent.d, exponent.g, exponent.s)
        else:
            s, d, g = K.st_from_float(float(exponent))
        if negate:
            s = -s
        return cls(*K.v_from_st(s, d, g))

    # -- predicates --------------------------------------------------------

    @property
    def is_plain(self) -> bool:
        return self.d == -1

    @property
    def triple(self):
        return self.d, self.g, self.s

    def is_integral_plain(self) -> bool:
        return self.d == -1 and self.g == int(self.g)

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other) -> "Value":
        o = Value.of(other)
        return Value(*K.v_mul(self.d, self.g, self.s, o.d, o.g, o.s))

    __rmul__ = __mul__

    def __add__(self, other) -> "Value":
        o = Value.of(other)
        return Value(*K.v_add(self.d, self.g, self.s, o.d, o.g, o.s))

    __radd__ = __add__

    def __pow__(self, r: float) -> "Value":
        return Value(*K.v_pow(self.d, self.g, self.s, float(r)))

    def inv(self) -> "Value":
        return self ** -1.0

    def ceil(self) -> "Value":
        return Value(*K.v_ceil(self.d, self.g, self.s))

    def dec(self) -> "Value":
        """self - 1, for self >= 1."""
        return Value(*K.v_dec(self.d, self.g, self.s))

    def log2_triple(self):
        """(s, d, g) signed tower of log2(self)."""
        return K.v_log2(self.d, self.g, self.s)

    # -- comparisons -------------------------------------------------------

    def cmp(self, other) -> int:
        o = Value.of(other)
        return K.v_cmp(self.d, self.g, self.s, o.d, o.g, o.s)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __eq__(self, other):
        try:
            return self.cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.triple)

    # -- conversion --------------------------------------------------------

    def __float__(self) -> float:
        return K.v_to_float(self.d, self.g, self.s)

    def to_json(self):
        """int for integral plain values, float for plain, token string
        for tower-scale values."""
        if self.is_integral_plain() and abs(self.g) < 2 ** 53:
            return int(self.g)
        if self.is_plain:
            return self.g
        return str(self)

    def __str__(self) -> str:
        if self.is_plain:
            return repr(self.g)
        tail = _tower_str(self.d, self.g)
        if "^" in tail:
            tail = f"({tail})"
        return "2^" + ("-" if self.s < 0 else "") + tail

    def __repr__(self):
        return f"Value({self})"


def _fmt_g(g: float) -> str:
    if g == int(g):
        return str(int(g))
    return f"{g:.3f}"


def _tower_str(d: int, g: float) -> str:
    out = _fmt_g(g)
    for _ in range(d):
        out = f"2^({out})" if "^" in out else f"2^{out}"
    return out


ZERO = Value(-1, 0.0, 1)
ONE = Value(-1, 1.0, 1)
