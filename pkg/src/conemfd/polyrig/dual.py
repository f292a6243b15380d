"""Forward-mode dual arrays: a value array plus a trailing gradient axis.

``DualArray(v, d)`` represents ``v + eps * d`` with ``d.shape == v.shape + (m,)``
for ``m`` seed directions.  Only the operations the polyhedron code needs are
provided.
"""

from __future__ import annotations

import numpy as np


class DualArray:
    __array_priority__ = 1000
    # make numpy defer to the reflected operators
    __array_ufunc__ = None

    def __init__(self, value, deriv):
        self.value = np.asarray(value, dtype=float)
        self.deriv = np.asarray(deriv, dtype=float)
        if self.deriv.shape[:-1] != self.value.shape:
            raise ValueError(f"derivative shape {self.deriv.shape} does not extend {self.value.shape}")

    @property
    def nseed(self) -> int:
        return self.deriv.shape[-1]

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"DualArray(value={self.value!r}, nseed={self.nseed})"

    def _lift(self, other) -> "DualArray":
        if isinstance(other, DualArray):
            return other
        other = np.asarray(other, dtype=float)
        return DualArray(other, np.zeros(other.shape + (self.nseed,)))

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return DualArray(self.value[idx], self.deriv[idx + (Ellipsis,)] if Ellipsis not in idx else self.deriv[idx])

    def __neg__(self):
        return DualArray(-self.value, -self.deriv)

    def __add__(self, other):
        o = self._lift(other)
        v = self.value + o.value
        return DualArray(v, _bcast(self.deriv, v.shape) + _bcast(o.deriv, v.shape))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        v = self.value * o.value
        d = _bcast(self.deriv * o.value[..., None], v.shape) + _bcast(o.deriv * self.value[..., None], v.shape)
        return DualArray(v, d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return self * reciprocal(o)

    def __rtruediv__(self, other):
        return self._lift(other) * reciprocal(self)

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(self.value.ndim))
        else:
            axes = (axis % self.value.ndim,) if isinstance(axis, int) else tuple(a % self.value.ndim for a in axis)
        return DualArray(self.value.sum(axis=axes), self.deriv.sum(axis=axes))


def _bcast(d, shape):
    return np.broadcast_to(d, tuple(shape) + (d.shape[-1],))


def _chain(x: DualArray, fv, dfv) -> DualArray:
    return DualArray(fv, x.deriv * np.asarray(dfv)[..., None])


def reciprocal(x: DualArray) -> DualArray:
    return _chain(x, 1.0 / x.value, -1.0 / x.value**2)


def sqrt(x):
    if not isinstance(x, DualArray):
        return np.sqrt(x)
    r = np.sqrt(x.value)
    return _chain(x, r, 0.5 / r)


def arccos(x):
    if not isinstance(x, DualArray):
        return np.arccos(x)
    return _chain(x, np.arccos(x.value), -1.0 / np.sqrt(1.0 - x.value**2))


def stack(items, axis: int = 0) -> DualArray:
    """Stack DualArrays (all with the same seed count) along a new value axis."""
    items = list(items)
    v = np.stack([i.value for i in items], axis=axis)
    ax = axis if axis >= 0 else axis - 1
    d = np.stack([i.deriv for i in items], axis=ax)
    return DualArray(v, d)


def concatenate(items) -> DualArray:
    items = list(items)
    return DualArray(np.concatenate([i.value for i in items]), np.concatenate([i.deriv for i in items]))


def value_of(x):
    return x.value if isinstance(x, DualArray) else np.asarray(x, dtype=float)


def seed(value: np.ndarray, directions: np.ndarray) -> DualArray:
    """Dual array whose derivative along seed ``k`` is ``directions[..., k]``."""
    return DualArray(value, directions)
