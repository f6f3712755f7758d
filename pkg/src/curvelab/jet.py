"""Bivariate truncated Taylor series ("jets").

A :class:`Jet2` carries the Taylor expansion of a real quantity around a point
``(u0, v0)`` up to total degree ``order``.  Coefficients are stored
Taylor-normalized::

    coeffs[i, j] = d^(i+j) f / du^i dv^j  /  (i! j!)

so that multiplication is a truncated Cauchy product.  Every geometric quantity
in curvelab is computed by pushing seeded jets through ordinary arithmetic, so
the partial derivatives it exposes are exact up to floating point roundoff.

The elementary functions in this module (:func:`sqrt`, :func:`sin`, ...) accept
plain floats as well as jets, which lets the same immersion code run on both.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, OutOfOrderError, SingularityError

MIN_ORDER = 2
MAX_ORDER = 4
DEFAULT_ORDER = 3


def check_order(order: int) -> int:
    if not isinstance(order, (int, np.integer)) or not MIN_ORDER <= order <= MAX_ORDER:
        raise ConfigurationError(f"jet order must be an integer in {MIN_ORDER}..{MAX_ORDER}, got {order!r}")
    return int(order)


@lru_cache(maxsize=None)
def _product_table(order: int):
    size = order + 1
    ia, ib, io = [], [], []
    for i1 in range(size):
        for j1 in range(size - i1):
            for i2 in range(size - i1):
                for j2 in range(size - j1 - i1 - i2):
                    ia.append(i1 * size + j1)
                    ib.append(i2 * size + j2)
                    io.append((i1 + i2) * size + (j1 + j2))
    return np.array(ia), np.array(ib), np.array(io)


@lru_cache(maxsize=None)
def _mask(order: int) -> np.ndarray:
    i, j = np.indices((order + 1, order + 1))
    return (i + j) <= order


class Jet2:
    """Truncated bivariate Taylor expansion.

    Binary operations between jets of different order truncate to the lower
    order, which is exact: both operands are only known to that order.
    """

    __slots__ = ("coeffs", "order")
    # keep numpy scalars from broadcasting a Jet2 into an object array
    __array_ufunc__ = None

    def __init__(self, coeffs, order: int | None = None):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1]:
            raise ConfigurationError("jet coefficients must be a square 2-d array")
        if order is None:
            order = coeffs.shape[0] - 1
        if not 0 <= order <= MAX_ORDER or coeffs.shape[0] != order + 1:
            raise ConfigurationError(f"inconsistent jet order {order} for shape {coeffs.shape}")
        self.coeffs = np.where(_mask(order), coeffs, 0.0)
        self.order = order

    @classmethod
    def _raw(cls, coeffs: np.ndarray, order: int) -> "Jet2":
        jet = object.__new__(cls)
        jet.coeffs = coeffs
        jet.order = order
        return jet

    @classmethod
    def constant(cls, value: float, order: int = DEFAULT_ORDER) -> "Jet2":
        c = np.zeros((order + 1, order + 1))
        c[0, 0] = value
        return cls._raw(c, order)

    # -- inspection --------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0, 0])

    def partial(self, i: int, j: int) -> float:
        """Return d^(i+j) f / du^i dv^j at the expansion point."""
        return partial(self, i, j)

    def gradient(self) -> np.ndarray:
        return np.array([self.partial(1, 0), self.partial(0, 1)])

    def hessian(self) -> np.ndarray:
        fuv = self.partial(1, 1)
        return np.array([[self.partial(2, 0), fuv], [fuv, self.partial(0, 2)]])

    def diff(self, var: int) -> "Jet2":
        """Jet of the partial derivative along ``var`` (0 = u, 1 = v); one order lower."""
        if self.order == 0:
            raise OutOfOrderError("cannot differentiate an order-0 jet")
        p = self.order
        c = self.coeffs
        if var == 0:
            out = c[1:, :p] * np.arange(1, p + 1)[:, None]
        else:
            out = c[:p, 1:] * np.arange(1, p + 1)[None, :]
        return Jet2._raw(np.where(_mask(p - 1), out, 0.0), p - 1)

    def truncate(self, order: int) -> "Jet2":
        if order > self.order:
            raise OutOfOrderError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet2._raw(self.coeffs[: order + 1, : order + 1].copy(), order)

    def __repr__(self) -> str:
        return f"Jet2(order={self.order}, value={self.value:.6g})"

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> tuple[np.ndarray, np.ndarray, int] | None:
        if isinstance(other, Jet2):
            p = min(self.order, other.order)
            a = self.coeffs if self.order == p else self.coeffs[: p + 1, : p + 1]
            b = other.coeffs if other.order == p else other.coeffs[: p + 1, : p + 1]
            return a, b, p
        if isinstance(other, (int, float, np.floating, np.integer)):
            b = np.zeros_like(self.coeffs)
            b[0, 0] = other
            return self.coeffs, b, self.order
        return None

    def __add__(self, other):
        ops = self._coerce(other)
        if ops is None:
            return NotImplemented
        a, b, p = ops
        return Jet2._raw(a + b, p)

    __radd__ = __add__

    def __sub__(self, other):
        ops = self._coerce(other)
        if ops is None:
            return NotImplemented
        a, b, p = ops
        return Jet2._raw(a - b, p)

    def __rsub__(self, other):
        ops = self._coerce(other)
        if ops is None:
            return NotImplemented
        a, b, p = ops
        return Jet2._raw(b - a, p)

    def __neg__(self):
        return Jet2._raw(-self.coeffs, self.order)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet2._raw(self.coeffs * float(other), self.order)
        ops = self._coerce(other)
        if ops is None:
            return NotImplemented
        a, b, p = ops
        ia, ib, io = _product_table(p)
        size = p + 1
        out = np.bincount(io, weights=a.ravel()[ia] * b.ravel()[ib], minlength=size * size)
        return Jet2._raw(out.reshape(size, size), p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if other == 0:
                raise SingularityError("division by zero")
            return Jet2._raw(self.coeffs / float(other), self.order)
        if isinstance(other, Jet2):
            return self * recip(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return recip(self) * float(other)
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, np.integer)):
            return NotImplemented
        return pow_int(self, int(exponent))


def jet_seed(which: str | int, value: float, order: int = DEFAULT_ORDER) -> Jet2:
    """Independent variable ``u`` (``which`` = "u" / 0) or ``v`` ("v" / 1) at ``value``."""
    order = check_order(order)
    if which in ("u", 0):
        idx = (1, 0)
    elif which in ("v", 1):
        idx = (0, 1)
    else:
        raise ConfigurationError(f"seed variable must be 'u' or 'v', got {which!r}")
    c = np.zeros((order + 1, order + 1))
    c[0, 0] = value
    c[idx] = 1.0
    return Jet2._raw(c, order)


def seed_pair(u: float, v: float, order: int = DEFAULT_ORDER) -> tuple[Jet2, Jet2]:
    return jet_seed("u", u, order), jet_seed("v", v, order)


def partial(f: Jet2, i: int, j: int) -> float:
    if i < 0 or j < 0 or i + j > f.order:
        raise OutOfOrderError(f"partial ({i}, {j}) exceeds jet order {f.order}")
    return float(f.coeffs[i, j]) * math.factorial(i) * math.factorial(j)


def compose(a: Jet2, derivatives: Sequence[float]) -> Jet2:
    """Apply a univariate function given its derivatives phi^(k)(a0), k = 0..order."""
    p = a.order
    delta = Jet2._raw(a.coeffs.copy(), p)
    delta.coeffs[0, 0] = 0.0
    out = np.zeros_like(a.coeffs)
    out[0, 0] = derivatives[0]
    power = delta
    for k in range(1, p + 1):
        out = out + power.coeffs * (derivatives[k] / math.factorial(k))
        if k < p:
            power = power * delta
    return Jet2._raw(out, p)


def recip(a):
    if not isinstance(a, Jet2):
        if a == 0:
            raise SingularityError("reciprocal of zero")
        return 1.0 / a
    a0 = a.value
    if a0 == 0.0:
        raise SingularityError("reciprocal of a jet with zero constant term")
    # d^k/dx^k (1/x) = (-1)^k k! x^(-k-1)
    derivs = [(-1) ** k * math.factorial(k) * a0 ** (-k - 1) for k in range(a.order + 1)]
    return compose(a, derivs)


def pow_int(a, n: int):
    if not isinstance(a, Jet2):
        return a**n
    if n < 0:
        return pow_int(recip(a), -n)
    result = Jet2.constant(1.0, a.order)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def sqrt(a):
    if not isinstance(a, Jet2):
        if a < 0:
            raise DomainError(f"sqrt of negative value {a}")
        return math.sqrt(a)
    a0 = a.value
    if a0 <= 0.0:
        raise DomainError(f"sqrt of a jet with nonpositive constant term {a0}")
    derivs = []
    coef = 1.0
    for k in range(a.order + 1):
        derivs.append(coef * a0 ** (0.5 - k))
        coef *= 0.5 - k
    return compose(a, derivs)


def sin(a):
    if not isinstance(a, Jet2):
        return math.sin(a)
    s, c = math.sin(a.value), math.cos(a.value)
    cycle = (s, c, -s, -c)
    return compose(a, [cycle[k % 4] for k in range(a.order + 1)])


def cos(a):
    if not isinstance(a, Jet2):
        return math.cos(a)
    s, c = math.sin(a.value), math.cos(a.value)
    cycle = (c, -s, -c, s)
    return compose(a, [cycle[k % 4] for k in range(a.order + 1)])


def exp(a):
    if not isinstance(a, Jet2):
        return math.exp(a)
    e = math.exp(a.value)
    return compose(a, [e] * (a.order + 1))


def cosh(a):
    if not isinstance(a, Jet2):
        return math.cosh(a)
    ch, sh = math.cosh(a.value), math.sinh(a.value)
    return compose(a, [ch if k % 2 == 0 else sh for k in range(a.order + 1)])


def sinh(a):
    if not isinstance(a, Jet2):
        return math.sinh(a)
    ch, sh = math.cosh(a.value), math.sinh(a.value)
    return compose(a, [sh if k % 2 == 0 else ch for k in range(a.order + 1)])


_UNARY: dict[str, Callable] = {
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "exp": exp,
    "cosh": cosh,
    "sinh": sinh,
    "neg": lambda a: -a,
    "recip": recip,
}

_BINARY: dict[str, Callable] = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def jet_arith(op: str, *args):
    """Named-operation entry point; ``pow_int`` takes ``(jet, n)``."""
    if op in _UNARY:
        if len(args) != 1:
            raise ConfigurationError(f"{op} takes exactly one argument")
        return _UNARY[op](args[0])
    if op in _BINARY:
        if len(args) != 2:
            raise ConfigurationError(f"{op} takes exactly two arguments")
        a, b = args
        if isinstance(a, Jet2) and isinstance(b, Jet2) and a.order != b.order:
            raise ConfigurationError(f"{op}: jet orders differ ({a.order} vs {b.order})")
        return _BINARY[op](a, b)
    if op == "pow_int":
        a, n = args
        return pow_int(a, n)
    raise ConfigurationError(f"unknown jet operation {op!r}")


# -- small vector helpers over tuples of jets ------------------------------


def dot(a: Sequence, b: Sequence):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Sequence, b: Sequence) -> tuple:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def triple(a: Sequence, b: Sequence, c: Sequence):
    """Determinant (a, b, c) = <a, b x c>."""
    return dot(a, cross(b, c))


def as_jet(x, order: int) -> Jet2:
    return x if isinstance(x, Jet2) else Jet2.constant(float(x), order)
