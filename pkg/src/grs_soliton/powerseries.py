"""Dense truncated power series in one variable.

Coefficients are stored plainly: ``coeffs[n]`` multiplies ``t**n`` (no
factorial scaling). Every binary operation truncates to the smaller order of
its operands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

ZERO_THRESHOLD = 1e-300


class ZeroConstantTerm(ZeroDivisionError):
    """Raised when inverting a series whose constant term vanishes."""


class NonzeroConstantTerm(ValueError):
    """Raised when exponentiating a series with a nonzero constant term."""


@dataclass(frozen=True, eq=False)
class TruncSeries:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("a truncated series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, value: float, order: int) -> TruncSeries:
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, order: int) -> TruncSeries:
        """The series ``t`` truncated at ``order``."""
        c = np.zeros(order + 1)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[float], order: int | None = None) -> TruncSeries:
        c = np.asarray(list(coeffs), dtype=float)
        if order is None:
            return cls(c)
        out = np.zeros(order + 1)
        n = min(order + 1, c.size)
        out[:n] = c[:n]
        return cls(out)

    def truncate(self, order: int) -> TruncSeries:
        return TruncSeries.from_coeffs(self.coeffs, order)

    def is_even(self) -> bool:
        return not np.any(self.coeffs[1::2])

    def is_odd(self) -> bool:
        return not np.any(self.coeffs[0::2])

    def __getitem__(self, n: int) -> float:
        return float(self.coeffs[n])

    def __len__(self) -> int:
        return self.coeffs.size

    def __repr__(self) -> str:
        return f"TruncSeries(order={self.order}, coeffs={self.coeffs.tolist()})"

    def __add__(self, other):
        return add(self, _coerce(other, self.order))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(_coerce(other, self.order), -1.0))

    def __rsub__(self, other):
        return add(_coerce(other, self.order), scale(self, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncSeries):
            return mul(self, reciprocal(other))
        return scale(self, 1.0 / float(other))

    def __call__(self, t):
        return eval_horner(self, t)


def _coerce(x, order: int) -> TruncSeries:
    if isinstance(x, TruncSeries):
        return x
    return TruncSeries.constant(float(x), order)


def scale(a: TruncSeries, s: float) -> TruncSeries:
    return TruncSeries(a.coeffs * s)


def add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    n = min(a.order, b.order) + 1
    return TruncSeries(a.coeffs[:n] + b.coeffs[:n])


def mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    """Cauchy product truncated at the smaller order."""
    n = min(a.order, b.order) + 1
    return TruncSeries(np.convolve(a.coeffs[:n], b.coeffs[:n])[:n])


def reciprocal(a: TruncSeries, threshold: float = ZERO_THRESHOLD) -> TruncSeries:
    c = a.coeffs
    if abs(c[0]) <= threshold:
        raise ZeroConstantTerm(f"constant term {c[0]!r} is too small to invert")
    n = c.size
    r = np.zeros(n)
    r[0] = 1.0 / c[0]
    for k in range(1, n):
        # sum_{j=1..k} c_j r_{k-j}
        r[k] = -np.dot(c[1 : k + 1], r[k - 1 :: -1][:k]) / c[0]
    return TruncSeries(r)


def exp_series(a: TruncSeries) -> TruncSeries:
    """Exponential of a series with zero constant term.

    Uses the recurrence from ``y' = a' y``: ``n y_n = sum_k k a_k y_{n-k}``.
    """
    c = a.coeffs
    if c[0] != 0.0:
        raise NonzeroConstantTerm(f"exp_series needs c0 == 0, got {c[0]!r}")
    n = c.size
    ka = np.arange(n) * c
    y = np.zeros(n)
    y[0] = 1.0
    for m in range(1, n):
        y[m] = np.dot(ka[1 : m + 1], y[m - 1 :: -1][:m]) / m
    return TruncSeries(y)


def differentiate(a: TruncSeries) -> TruncSeries:
    if a.order == 0:
        return TruncSeries(np.zeros(1))
    return TruncSeries(a.coeffs[1:] * np.arange(1, a.order + 1))


def integrate(a: TruncSeries) -> TruncSeries:
    """Antiderivative vanishing at 0; order grows by one."""
    return TruncSeries(np.concatenate(([0.0], a.coeffs / np.arange(1, a.order + 2))))


def shift_down(a: TruncSeries) -> TruncSeries:
    """Divide by ``t``; the constant term must vanish."""
    if a.coeffs[0] != 0.0:
        raise NonzeroConstantTerm("cannot divide by t: constant term is nonzero")
    if a.order == 0:
        return TruncSeries(np.zeros(1))
    return TruncSeries(a.coeffs[1:])


def shift_up(a: TruncSeries, k: int = 1) -> TruncSeries:
    """Multiply by ``t**k`` keeping the same order (top terms drop out)."""
    c = np.zeros(a.order + 1)
    if k <= a.order:
        c[k:] = a.coeffs[: a.order + 1 - k]
    return TruncSeries(c)


def eval_horner(a: TruncSeries, t):
    """Value at ``t`` (scalar or array) by nested multiplication."""
    acc = np.zeros_like(np.asarray(t, dtype=float)) + a.coeffs[-1]
    for c in a.coeffs[-2::-1]:
        acc = acc * t + c
    if np.ndim(acc) == 0:
        return float(acc)
    return acc
