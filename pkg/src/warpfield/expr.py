"""Closed-form scalar expressions over chart coordinates.

Every scalar field that enters the engine (metric entries, warping
functions, potentials) is a small immutable tree built from the nodes
below.  Trees are built with ordinary Python operators::

    >>> r, theta = coords(2)
    >>> g_thth = tanh(r) ** 2
    >>> print(g_thth)
    (tanh(x0))^2

Evaluation (values and exact derivatives) lives in :mod:`warpfield.jets`.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence, Union

from .errors import InterpolationRangeError, SpecFormatError

Number = Union[int, float]

FUNCTIONS = ("exp", "ln", "sin", "cos", "sinh", "cosh", "tanh", "sqrt")


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def __add__(self, other: Expr | Number) -> Expr:
        return Add((self, as_expr(other)))

    def __radd__(self, other: Number) -> Expr:
        return Add((as_expr(other), self))

    def __sub__(self, other: Expr | Number) -> Expr:
        return Add((self, Neg(as_expr(other))))

    def __rsub__(self, other: Number) -> Expr:
        return Add((as_expr(other), Neg(self)))

    def __mul__(self, other: Expr | Number) -> Expr:
        return Mul((self, as_expr(other)))

    def __rmul__(self, other: Number) -> Expr:
        return Mul((as_expr(other), self))

    def __truediv__(self, other: Expr | Number) -> Expr:
        return Div(self, as_expr(other))

    def __rtruediv__(self, other: Number) -> Expr:
        return Div(as_expr(other), self)

    def __pow__(self, exponent: int | Fraction | str) -> Expr:
        return Pow(self, Fraction(exponent))

    def __neg__(self) -> Expr:
        return Neg(self)

    def children(self) -> tuple[Expr, ...]:
        return ()


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float

    def __str__(self) -> str:
        return repr(float(self.value))


@dataclass(frozen=True, slots=True)
class Coord(Expr):
    index: int

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True, slots=True)
class Add(Expr):
    args: tuple[Expr, ...]

    def children(self) -> tuple[Expr, ...]:
        return self.args

    def __str__(self) -> str:
        return "(" + " + ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    args: tuple[Expr, ...]

    def children(self) -> tuple[Expr, ...]:
        return self.args

    def __str__(self) -> str:
        return "(" + "*".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True, slots=True)
class Div(Expr):
    num: Expr
    den: Expr

    def children(self) -> tuple[Expr, ...]:
        return (self.num, self.den)

    def __str__(self) -> str:
        return f"({self.num}/{self.den})"


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def children(self) -> tuple[Expr, ...]:
        return (self.base,)

    def __str__(self) -> str:
        return f"({self.base})^{self.exponent}"


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr

    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def __str__(self) -> str:
        return f"(-{self.arg})"


@dataclass(frozen=True, slots=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self) -> None:
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def __str__(self) -> str:
        return f"{self.name}({self.arg})"


@dataclass(frozen=True, slots=True)
class Spline(Expr):
    """Piecewise quintic Hermite interpolant applied to ``arg``.

    Each node carries value, first and second derivative, so the
    interpolant is C2 and its second derivative is exact on every piece.
    ``increments`` optionally gives ``values[i+1] - values[i]`` computed
    without cancellation; the second derivative amplifies any rounding in
    that difference by ``1/width^2``.
    """

    arg: Expr
    knots: tuple[float, ...]
    values: tuple[float, ...]
    slopes: tuple[float, ...]
    curvatures: tuple[float, ...]
    increments: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.knots)
        if n < 2:
            raise ValueError("spline needs at least two knots")
        if not (len(self.values) == len(self.slopes) == len(self.curvatures) == n):
            raise ValueError("spline data arrays must match the knot count")
        if self.increments is not None and len(self.increments) != n - 1:
            raise ValueError("spline increments must have one entry per interval")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("spline knots must be strictly increasing")

    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def __str__(self) -> str:
        return f"spline[{self.knots[0]:g}..{self.knots[-1]:g}]({self.arg})"

    def evaluate(self, x: float) -> tuple[float, float, float]:
        """Interpolant value, first and second derivative at ``x``."""
        k = self.knots
        if not k[0] <= x <= k[-1]:
            raise InterpolationRangeError(
                f"spline evaluated at {x!r} outside [{k[0]!r}, {k[-1]!r}]"
            )
        i = min(bisect.bisect_right(k, x) - 1, len(k) - 2)
        if x == k[i]:
            return self.values[i], self.slopes[i], self.curvatures[i]
        if x == k[i + 1]:
            return self.values[i + 1], self.slopes[i + 1], self.curvatures[i + 1]
        h = k[i + 1] - k[i]
        t = (x - k[i]) / h
        y0 = self.values[i]
        dy = self.values[i + 1] - y0 if self.increments is None else self.increments[i]
        d0, d1 = h * self.slopes[i], h * self.slopes[i + 1]
        c0, c1 = h * h * self.curvatures[i], h * h * self.curvatures[i + 1]
        a0, a1, a2 = y0, d0, 0.5 * c0
        a3 = 10.0 * dy - 6.0 * d0 - 4.0 * d1 - 1.5 * c0 + 0.5 * c1
        a4 = -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 1.5 * c0 - c1
        a5 = 6.0 * dy - 3.0 * d0 - 3.0 * d1 - 0.5 * c0 + 0.5 * c1
        p = a0 + t * (a1 + t * (a2 + t * (a3 + t * (a4 + t * a5))))
        dp = a1 + t * (2 * a2 + t * (3 * a3 + t * (4 * a4 + t * 5 * a5)))
        ddp = 2 * a2 + t * (6 * a3 + t * (12 * a4 + t * 20 * a5))
        return p, dp / h, ddp / (h * h)


def as_expr(value: Expr | Number) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def const(value: Number) -> Const:
    return Const(float(value))


def coord(index: int) -> Coord:
    return Coord(index)


def coords(dim: int, start: int = 0) -> tuple[Coord, ...]:
    return tuple(Coord(start + i) for i in range(dim))


def _func(name: str) -> Callable[[Expr | Number], Func]:
    def make(arg: Expr | Number) -> Func:
        return Func(name, as_expr(arg))

    make.__name__ = name
    return make


exp = _func("exp")
ln = _func("ln")
sin = _func("sin")
cos = _func("cos")
sinh = _func("sinh")
cosh = _func("cosh")
tanh = _func("tanh")
sqrt = _func("sqrt")


def is_constant(expr: Expr) -> bool:
    """True when the tree contains no coordinate node."""
    return max_coord(expr) < 0


def max_coord(expr: Expr) -> int:
    """Largest coordinate index referenced by ``expr`` (-1 if none)."""
    best = -1
    stack = [expr]
    seen: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Coord):
            best = max(best, node.index)
        stack.extend(node.children())
    return best


def remap_coords(expr: Expr, mapping: Mapping[int, int] | Callable[[int], int]) -> Expr:
    """Copy of ``expr`` with coordinate indices renamed.

    Shared subtrees stay shared in the copy.
    """
    fn = mapping if callable(mapping) else mapping.__getitem__
    memo: dict[int, Expr] = {}

    def walk(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Coord):
            out: Expr = Coord(fn(node.index))
        elif isinstance(node, Const):
            out = node
        elif isinstance(node, Add):
            out = Add(tuple(walk(a) for a in node.args))
        elif isinstance(node, Mul):
            out = Mul(tuple(walk(a) for a in node.args))
        elif isinstance(node, Div):
            out = Div(walk(node.num), walk(node.den))
        elif isinstance(node, Pow):
            out = Pow(walk(node.base), node.exponent)
        elif isinstance(node, Neg):
            out = Neg(walk(node.arg))
        elif isinstance(node, Func):
            out = Func(node.name, walk(node.arg))
        elif isinstance(node, Spline):
            out = Spline(walk(node.arg), node.knots, node.values, node.slopes, node.curvatures,
                         node.increments)
        else:  # pragma: no cover - exhaustive over node types
            raise TypeError(type(node))
        memo[key] = out
        return out

    return walk(expr)


def shift_coords(expr: Expr, offset: int) -> Expr:
    return remap_coords(expr, lambda i: i + offset)


# --- JSON encoding -----------------------------------------------------------

def _fraction_to_json(q: Fraction) -> int | str:
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_json(expr: Expr) -> Any:
    """Tagged-tree JSON form of ``expr`` (plain dicts and lists)."""
    if isinstance(expr, Const):
        return {"const": expr.value}
    if isinstance(expr, Coord):
        return {"coord": expr.index}
    if isinstance(expr, (Add, Mul)):
        return {"op": "add" if isinstance(expr, Add) else "mul",
                "args": [to_json(a) for a in expr.args]}
    if isinstance(expr, Div):
        return {"op": "div", "args": [to_json(expr.num), to_json(expr.den)]}
    if isinstance(expr, Neg):
        return {"op": "neg", "args": [to_json(expr.arg)]}
    if isinstance(expr, Pow):
        return {"op": "pow", "args": [to_json(expr.base)],
                "exponent": _fraction_to_json(expr.exponent)}
    if isinstance(expr, Func):
        return {"op": expr.name, "args": [to_json(expr.arg)]}
    if isinstance(expr, Spline):
        doc = {"op": "spline", "args": [to_json(expr.arg)],
               "knots": list(expr.knots), "values": list(expr.values),
               "slopes": list(expr.slopes), "curvatures": list(expr.curvatures)}
        if expr.increments is not None:
            doc["increments"] = list(expr.increments)
        return doc
    raise TypeError(type(expr))  # pragma: no cover


def _check_keys(doc: Mapping[str, Any], allowed: set[str]) -> None:
    extra = set(doc) - allowed
    if extra:
        raise SpecFormatError(f"unknown expression keys {sorted(extra)}")


def _args(doc: Mapping[str, Any], count: int | None = None) -> list[Expr]:
    args = doc.get("args")
    if not isinstance(args, list) or (count is not None and len(args) != count):
        want = "a list" if count is None else f"{count} argument(s)"
        raise SpecFormatError(f"operator {doc.get('op')!r} needs {want}")
    return [from_json(a) for a in args]


def from_json(doc: Any) -> Expr:
    """Inverse of :func:`to_json`; bare numbers are accepted as constants."""
    if isinstance(doc, bool):
        raise SpecFormatError("booleans are not expressions")
    if isinstance(doc, (int, float)):
        return Const(float(doc))
    if not isinstance(doc, Mapping):
        raise SpecFormatError(f"expression must be an object or a number, got {doc!r}")
    if "const" in doc:
        _check_keys(doc, {"const"})
        if not isinstance(doc["const"], (int, float)) or isinstance(doc["const"], bool):
            raise SpecFormatError("const must be a number")
        return Const(float(doc["const"]))
    if "coord" in doc:
        _check_keys(doc, {"coord"})
        idx = doc["coord"]
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise SpecFormatError("coord must be a non-negative integer")
        return Coord(idx)
    op = doc.get("op")
    if op in ("add", "mul"):
        _check_keys(doc, {"op", "args"})
        args = _args(doc)
        if not args:
            raise SpecFormatError(f"{op} needs at least one argument")
        return Add(tuple(args)) if op == "add" else Mul(tuple(args))
    if op == "div":
        _check_keys(doc, {"op", "args"})
        num, den = _args(doc, 2)
        return Div(num, den)
    if op == "neg":
        _check_keys(doc, {"op", "args"})
        return Neg(_args(doc, 1)[0])
    if op == "pow":
        _check_keys(doc, {"op", "args", "exponent"})
        try:
            q = Fraction(doc["exponent"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SpecFormatError(f"bad exponent in {doc!r}") from exc
        return Pow(_args(doc, 1)[0], q)
    if op in FUNCTIONS:
        _check_keys(doc, {"op", "args"})
        return Func(op, _args(doc, 1)[0])
    if op == "spline":
        _check_keys(doc, {"op", "args", "knots", "values", "slopes", "curvatures", "increments"})
        try:
            inc = doc.get("increments")
            return Spline(_args(doc, 1)[0], *(tuple(float(v) for v in doc[key]) for key in
                                               ("knots", "values", "slopes", "curvatures")),
                          None if inc is None else tuple(float(v) for v in inc))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecFormatError(f"bad spline node: {exc}") from exc
    raise SpecFormatError(f"unknown expression node {doc!r}")


def parse_many(docs: Sequence[Any]) -> list[Expr]:
    return [from_json(d) for d in docs]
