"""Minimal vectorized forward-mode derivative propagation.

A :class:`Dual` carries a value array of arbitrary grid shape together with
derivatives along a fixed number of seed directions (leading axis of
``der``).  Only the operations needed by the constitutive map are
implemented.  Constants (floats or plain arrays) mix freely with duals.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Dual", "constant", "seeded"]


class Dual:
    """Value plus seed derivatives: ``der`` has shape (nseed,) + val.shape."""

    __slots__ = ("val", "der")

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)

    @property
    def nseed(self):
        return self.der.shape[0]

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.der * other.val + self.val * other.der)
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            return Dual(self.val * inv,
                        (self.der - self.val * inv * other.der) * inv)
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        return Dual(other * inv, -other * inv * inv * self.der)

    def __pow__(self, exponent):
        p = float(exponent)
        return Dual(self.val**p, p * self.val ** (p - 1.0) * self.der)

    def sqrt(self):
        root = np.sqrt(self.val)
        return Dual(root, 0.5 / root * self.der)


def constant(value, nseed):
    """Dual with zero derivatives."""
    value = np.asarray(value, dtype=float)
    return Dual(value, np.zeros((nseed,) + value.shape))


def seeded(value, nseed, index):
    """Dual whose derivative is 1 along one seed direction."""
    value = np.asarray(value, dtype=float)
    der = np.zeros((nseed,) + value.shape)
    der[index] = 1.0
    return Dual(value, der)
