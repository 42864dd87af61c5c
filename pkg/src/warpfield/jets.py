"""Truncated-Taylor (jet) evaluation of expression trees.

Two carriers share one evaluator:

* :class:`Jet2` tracks a value, derivatives along two probe directions
  ``u`` and ``v`` and the mixed second derivative ``D_u D_v``.
* :class:`DenseJet` tracks the value, the full coordinate gradient and the
  full coordinate Hessian in one pass.  Curvature code uses this one; the
  directional carrier is the reference it is tested against.

Both are exact up to floating point rounding: there is no step size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import DomainError
from .expr import Add, Const, Coord, Div, Expr, Func, Mul, Neg, Pow, Spline

__all__ = [
    "Jet2",
    "DenseJet",
    "eval_value",
    "eval_jet2",
    "eval_grad_hess_raw",
    "eval_grad_hess_many",
    "eval_values",
]


@dataclass(frozen=True, slots=True)
class Jet2:
    value: float
    du: float
    dv: float
    duv: float

    @classmethod
    def constant(cls, c: float) -> Jet2:
        return cls(c, 0.0, 0.0, 0.0)

    def __add__(self, other: Jet2) -> Jet2:
        return Jet2(self.value + other.value, self.du + other.du,
                    self.dv + other.dv, self.duv + other.duv)

    def __neg__(self) -> Jet2:
        return Jet2(-self.value, -self.du, -self.dv, -self.duv)

    def __mul__(self, other: Jet2) -> Jet2:
        a, b = self, other
        return Jet2(
            a.value * b.value,
            a.du * b.value + a.value * b.du,
            a.dv * b.value + a.value * b.dv,
            a.duv * b.value + a.du * b.dv + a.dv * b.du + a.value * b.duv,
        )

    def chain(self, f0: float, f1: float, f2: float) -> Jet2:
        """Jet of ``F(self)`` given ``F, F', F''`` at ``self.value``."""
        return Jet2(f0, f1 * self.du, f1 * self.dv, f1 * self.duv + f2 * self.du * self.dv)

    def scale(self, c: float) -> Jet2:
        return Jet2(c * self.value, c * self.du, c * self.dv, c * self.duv)


class DenseJet:
    """Value, gradient and Hessian with respect to every chart coordinate."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = value
        self.grad = grad
        self.hess = hess

    @classmethod
    def constant(cls, c: float, dim: int) -> DenseJet:
        return cls(c, np.zeros(dim), np.zeros((dim, dim)))

    def __add__(self, other: DenseJet) -> DenseJet:
        return DenseJet(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __neg__(self) -> DenseJet:
        return DenseJet(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: DenseJet) -> DenseJet:
        a, b = self, other
        cross = np.outer(a.grad, b.grad)
        return DenseJet(
            a.value * b.value,
            a.grad * b.value + a.value * b.grad,
            a.hess * b.value + cross + cross.T + a.value * b.hess,
        )

    def chain(self, f0: float, f1: float, f2: float) -> DenseJet:
        return DenseJet(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))

    def scale(self, c: float) -> DenseJet:
        return DenseJet(c * self.value, c * self.grad, c * self.hess)


def _derivs(name: str, a: float, node: Expr) -> tuple[float, float, float]:
    """F(a), F'(a), F''(a) for the elementary function ``name``."""
    if name == "exp":
        e = math.exp(a)
        return e, e, e
    if name == "ln":
        if not a > 0.0:
            raise DomainError(f"ln of non-positive value {a!r} in {node}")
        return math.log(a), 1.0 / a, -1.0 / (a * a)
    if name == "sin":
        s, c = math.sin(a), math.cos(a)
        return s, c, -s
    if name == "cos":
        s, c = math.sin(a), math.cos(a)
        return c, -s, -c
    if name == "sinh":
        return math.sinh(a), math.cosh(a), math.sinh(a)
    if name == "cosh":
        return math.cosh(a), math.sinh(a), math.cosh(a)
    if name == "tanh":
        t = math.tanh(a)
        s2 = 1.0 - t * t
        return t, s2, -2.0 * t * s2
    if name == "sqrt":
        if not a > 0.0:
            raise DomainError(f"sqrt of non-positive value {a!r} in {node}")
        r = math.sqrt(a)
        return r, 0.5 / r, -0.25 / (a * r)
    raise ValueError(name)  # pragma: no cover


def _value_of(j) -> float:
    return j if isinstance(j, float) else j.value


J = TypeVar("J")


class _Evaluator:
    """Walks a tree once per point, memoising shared subtrees by identity."""

    def __init__(self, point: Sequence[float], leaf: Callable[[int], J], constant: Callable[[float], J]):
        self.point = point
        self.leaf = leaf
        self.constant = constant
        self.memo: dict[int, J] = {}

    def __call__(self, node: Expr):
        key = id(node)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._eval(node)
        self.memo[key] = out
        return out

    def _recip(self, j, node: Expr):
        a = _value_of(j)
        if a == 0.0:
            raise DomainError(f"division by zero in {node}")
        if isinstance(j, float):
            return 1.0 / a
        return j.chain(1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a))

    def _ipow(self, j, k: int):
        result = None
        base = j
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def _eval(self, node: Expr):
        if isinstance(node, Coord):
            if node.index >= len(self.point):
                raise DomainError(
                    f"coordinate x{node.index} used on a {len(self.point)}-dimensional chart"
                )
            return self.leaf(node.index)
        if isinstance(node, Const):
            return self.constant(node.value)
        if isinstance(node, Add):
            acc = self(node.args[0])
            for a in node.args[1:]:
                acc = acc + self(a)
            return acc
        if isinstance(node, Mul):
            acc = self(node.args[0])
            for a in node.args[1:]:
                acc = acc * self(a)
            return acc
        if isinstance(node, Neg):
            return -self(node.arg)
        if isinstance(node, Div):
            return self(node.num) * self._recip(self(node.den), node)
        if isinstance(node, Pow):
            base = self(node.base)
            q = node.exponent
            if q.denominator == 1:
                k = q.numerator
                if k == 0:
                    return self.constant(1.0)
                powered = self._ipow(base, abs(k))
                return powered if k > 0 else self._recip(powered, node)
            a = _value_of(base)
            if not a > 0.0:
                raise DomainError(f"non-integer power of non-positive value {a!r} in {node}")
            p = float(q)
            f0 = a ** p
            if isinstance(base, float):
                return f0
            return base.chain(f0, p * f0 / a, p * (p - 1.0) * f0 / (a * a))
        if isinstance(node, Func):
            arg = self(node.arg)
            f0, f1, f2 = _derivs(node.name, _value_of(arg), node)
            return f0 if isinstance(arg, float) else arg.chain(f0, f1, f2)
        if isinstance(node, Spline):
            arg = self(node.arg)
            f0, f1, f2 = node.evaluate(_value_of(arg))
            return f0 if isinstance(arg, float) else arg.chain(f0, f1, f2)
        raise TypeError(f"unsupported node {type(node).__name__}")  # pragma: no cover


def _as_point(point: Iterable[float]) -> np.ndarray:
    return np.atleast_1d(np.asarray(point, dtype=float))


def eval_values(exprs: Sequence[Expr], point: Iterable[float]) -> list[float]:
    """Plain values of several expressions, sharing common subtrees."""
    p = _as_point(point)
    ev = _Evaluator(p, lambda i: float(p[i]), float)
    return [float(ev(e)) for e in exprs]


def eval_value(expr: Expr, point: Iterable[float]) -> float:
    return eval_values([expr], point)[0]


def eval_jet2(expr: Expr, point: Iterable[float], u: Iterable[float], v: Iterable[float]) -> Jet2:
    """Value, ``D_u f``, ``D_v f`` and ``D_u D_v f`` at ``point``."""
    p, uu, vv = _as_point(point), _as_point(u), _as_point(v)
    if uu.shape != p.shape or vv.shape != p.shape:
        raise ValueError("direction vectors must match the point dimension")
    ev = _Evaluator(p, lambda i: Jet2(float(p[i]), float(uu[i]), float(vv[i]), 0.0), Jet2.constant)
    return ev(expr)


def eval_grad_hess_many(exprs: Sequence[Expr], point: Iterable[float]) -> list[DenseJet]:
    p = _as_point(point)
    d = p.size
    eye = np.eye(d)
    zero = np.zeros((d, d))
    ev = _Evaluator(p, lambda i: DenseJet(float(p[i]), eye[i].copy(), zero),
                    lambda c: DenseJet.constant(c, d))
    return [ev(e) for e in exprs]


def eval_grad_hess_raw(expr: Expr, point: Iterable[float]) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, coordinate gradient and coordinate second-derivative matrix."""
    j = eval_grad_hess_many([expr], point)[0]
    return j.value, j.grad, j.hess
