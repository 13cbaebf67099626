"""Nonsmooth planar systems Z = (X, Y) with switching function f.

Lie derivatives are kept as symbolic trees; everything pointwise (classification,
contact order, the sliding field) evaluates compiled versions of them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import expr as ex
from .expr import Expr, EvaluationError

TANGENCY_TOL = 1e-9
SLIDING_DEN_TOL = 1e-12
PSEUDO_EQ_TOL = 1e-9
REGULAR_GRAD_TOL = 1e-8
PROJECTION_TOL = 1e-8
BOUNDARY_XTOL = 1e-12


class SystemError_(Exception):
    """Malformed or degenerate system (the name avoids shadowing the builtin)."""


class SlidingUndefined(ArithmeticError):
    """The Filippov combination has a vanishing denominator (Xf == Yf)."""


class Visibility(str, enum.Enum):
    TRANSVERSAL = "transversal"
    VISIBLE = "visible"
    INVISIBLE = "invisible"
    ODD = "odd-contact"
    DEGENERATE = "degenerate"


class Kind(str, enum.Enum):
    SEWING = "sewing"
    SLIDING = "sliding"
    ESCAPING = "escaping"
    TANGENCY = "tangency"


@dataclass(frozen=True)
class PlanarField:
    first: Expr
    second: Expr

    @classmethod
    def parse(cls, a: str, b: str) -> "PlanarField":
        return cls(ex.fold(ex.parse(a)), ex.fold(ex.parse(b)))

    def negated(self) -> "PlanarField":
        return PlanarField(ex.fold(ex.Neg(self.first)), ex.fold(ex.Neg(self.second)))

    def scaled(self, c: float) -> "PlanarField":
        return PlanarField(ex.mul(ex.const(c), self.first), ex.mul(ex.const(c), self.second))

    def __str__(self):
        return f"({ex.to_string(self.first)}, {ex.to_string(self.second)})"


@dataclass(frozen=True)
class ContactData:
    order: Optional[int]  # None: every Lie derivative up to rmax vanished
    leading: float
    visibility: Visibility

    @property
    def degenerate(self) -> bool:
        return self.order is None


@dataclass(frozen=True)
class SigmaPointClass:
    point: tuple[float, float]
    kind: Kind
    lie_x: float
    lie_y: float
    pseudo_equilibrium: bool = False
    x_contact: Optional[ContactData] = None
    y_contact: Optional[ContactData] = None
    singular: bool = False


@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    kind: Kind


@dataclass
class Segmentation:
    intervals: list[Interval]
    boundaries: list[SigmaPointClass]

    def kinds(self) -> list[Kind]:
        return [iv.kind for iv in self.intervals]


def _lie(g: Expr, w: PlanarField) -> Expr:
    return ex.add(ex.mul(ex.differentiate(g, "x"), w.first),
                  ex.mul(ex.differentiate(g, "y"), w.second))


@dataclass(frozen=True, eq=False)
class FilippovSystem:
    """Z = X on f >= 0, Y on f <= 0, with Lie tables built at construction."""

    X: PlanarField
    Y: PlanarField
    f: Expr
    domain: tuple[float, float, float, float] = (-5.0, 5.0, -5.0, 5.0)
    rmax: int = 6
    name: str = ""

    def __post_init__(self):
        if self.rmax < 2:
            raise SystemError_("rmax must be at least 2")
        xmin, xmax, ymin, ymax = self.domain
        if not (xmin < xmax and ymin < ymax):
            raise SystemError_(f"empty domain {self.domain}")
        # first-order derivatives eagerly; higher orders on demand, since tree
        # size grows roughly sixfold per order for cubic fields
        object.__setattr__(self, "_tables", {"X": [_lie(self.f, self.X)], "Y": [_lie(self.f, self.Y)]})
        object.__setattr__(self, "_compiled", {})

    def _table(self, which: str, k: int) -> Expr:
        table = self._tables[which]
        w = self.X if which == "X" else self.Y
        while len(table) < k:
            table.append(_lie(table[-1], w))
        return table[k - 1]

    @property
    def lie_x(self) -> tuple[Expr, ...]:
        return tuple(self._table("X", k) for k in range(1, self.rmax + 1))

    @property
    def lie_y(self) -> tuple[Expr, ...]:
        return tuple(self._table("Y", k) for k in range(1, self.rmax + 1))

    # -- compiled evaluators -------------------------------------------------
    def _fn(self, key, e: Expr) -> Callable[[float, float], float]:
        cache = self._compiled
        fn = cache.get(key)
        if fn is None:
            fn = cache[key] = ex.compile_expr(e)
        return fn

    @cached_property
    def fx(self):
        return self._fn("f", self.f)

    @cached_property
    def grad_f(self):
        return (self._fn("fx", ex.differentiate(self.f, "x")), self._fn("fy", ex.differentiate(self.f, "y")))

    def field_fn(self, which: str):
        w = self.X if which == "X" else self.Y
        a = self._fn(which + "1", w.first)
        b = self._fn(which + "2", w.second)
        return lambda x, y: (a(x, y), b(x, y))

    def lie_fn(self, which: str, k: int):
        if not 1 <= k <= self.rmax:
            raise ValueError(f"Lie derivative order {k} outside 1..{self.rmax}")
        return self._fn((which, k), self._table(which, k))

    # -- geometry of Sigma ---------------------------------------------------
    @cached_property
    def sigma_level(self) -> Optional[float]:
        """If f = a*y + b (so Sigma is the line y = -b/a) return -b/a, else None."""
        dfx = ex.differentiate(self.f, "x")
        dfy = ex.differentiate(self.f, "y")
        if dfx == ex.ZERO and isinstance(dfy, ex.Const) and dfy.value != 0.0:
            b = ex.evaluate(self.f, 0.0, 0.0)
            return -b / dfy.value
        return None

    def require_graph(self) -> float:
        level = self.sigma_level
        if level is None:
            raise SystemError_("this operation needs Sigma = {y = const} (f of the form a*y + b)")
        return level

    def in_domain(self, x: float, y: float, margin: float = 0.0) -> bool:
        xmin, xmax, ymin, ymax = self.domain
        return xmin - margin <= x <= xmax + margin and ymin - margin <= y <= ymax + margin

    def negated(self) -> "FilippovSystem":
        """The time-reversed system -Z (sliding and escaping regions swap)."""
        return FilippovSystem(self.X.negated(), self.Y.negated(), self.f, self.domain, self.rmax,
                              name=self.name + ":reversed")

    def lie_derivative(self, which: str, k: int) -> Expr:
        if which not in ("X", "Y"):
            raise ValueError(f"which must be 'X' or 'Y', not {which!r}")
        if not 1 <= k <= self.rmax:
            raise ValueError(f"Lie derivative order {k} outside 1..{self.rmax}")
        return self._table(which, k)

    # -- pointwise -----------------------------------------------------------
    def _tolerance(self, which: str, k: int, x: float, y: float) -> float:
        # 1e-9 scaled by max |Lie| over a unit neighbourhood: invariant under field scaling
        fn = self.lie_fn(which, k)
        m = 0.0
        for dx in (-1.0, 0.0, 1.0):
            for dy in (-1.0, 0.0, 1.0):
                try:
                    m = max(m, abs(fn(x + dx, y + dy)))
                except EvaluationError:
                    pass
        return TANGENCY_TOL * m if m > 0 else TANGENCY_TOL

    def contact_order(self, which: str, p) -> ContactData:
        x, y = p
        self._check_on_sigma(x, y)
        for k in range(1, self.rmax + 1):
            v = self.lie_fn(which, k)(x, y)
            if abs(v) > self._tolerance(which, k, x, y):
                if k == 1:
                    vis = Visibility.TRANSVERSAL
                elif k % 2 == 1:
                    vis = Visibility.ODD
                elif which == "X":
                    vis = Visibility.VISIBLE if v > 0 else Visibility.INVISIBLE
                else:
                    vis = Visibility.VISIBLE if v < 0 else Visibility.INVISIBLE
                return ContactData(k, v, vis)
        return ContactData(None, 0.0, Visibility.DEGENERATE)

    def _check_on_sigma(self, x: float, y: float):
        fv = self.fx(x, y)
        if abs(fv) > PROJECTION_TOL:
            raise ValueError(f"point ({x}, {y}) is not on Sigma (f = {fv:.3e})")
        gx, gy = self.grad_f[0](x, y), self.grad_f[1](x, y)
        if math.hypot(gx, gy) < REGULAR_GRAD_TOL:
            raise SystemError_(f"0 is not a regular value of f at ({x}, {y})")

    def is_tangency(self, which: str, x: float, y: float) -> bool:
        return abs(self.lie_fn(which, 1)(x, y)) <= self._tolerance(which, 1, x, y)

    def classify_point(self, p) -> SigmaPointClass:
        x, y = float(p[0]), float(p[1])
        self._check_on_sigma(x, y)
        lx = self.lie_fn("X", 1)(x, y)
        ly = self.lie_fn("Y", 1)(x, y)
        if self.is_tangency("X", x, y) or self.is_tangency("Y", x, y):
            cx = self.contact_order("X", (x, y))
            cy = self.contact_order("Y", (x, y))
            singular = cx.visibility is Visibility.INVISIBLE and cy.visibility is Visibility.INVISIBLE
            return SigmaPointClass((x, y), Kind.TANGENCY, lx, ly, False, cx, cy, singular)
        if lx * ly > 0:
            return SigmaPointClass((x, y), Kind.SEWING, lx, ly)
        kind = Kind.SLIDING if lx < 0 else Kind.ESCAPING
        try:
            zs = self.sliding_eval((x, y))
            peq = math.hypot(*zs) <= PSEUDO_EQ_TOL
        except SlidingUndefined:
            peq = False
        return SigmaPointClass((x, y), kind, lx, ly, peq)

    def sliding_eval(self, p) -> tuple[float, float]:
        """Filippov convex combination ((Yf) X - (Xf) Y) / (Yf - Xf) at a point of Sigma."""
        x, y = float(p[0]), float(p[1])
        lx = self.lie_fn("X", 1)(x, y)
        ly = self.lie_fn("Y", 1)(x, y)
        den = ly - lx
        if abs(den) <= SLIDING_DEN_TOL:
            raise SlidingUndefined(f"Xf = Yf at ({x}, {y}); sliding field undefined")
        X1, X2 = self.field_fn("X")(x, y)
        Y1, Y2 = self.field_fn("Y")(x, y)
        return ((ly * X1 - lx * Y1) / den, (ly * X2 - lx * Y2) / den)

    def sliding_speed(self, s: float) -> float:
        """Tangential speed x' of the sliding field along Sigma = {y = const}.

        At a point where Xf = Yf = 0 the combination is 0/0; the removable
        singularity is filled by the mean of the two one-sided values.
        """
        level = self.require_graph()
        try:
            return self.sliding_eval((s, level))[0]
        except SlidingUndefined:
            h = 1e-7 * (1.0 + abs(s))
            return 0.5 * (self.sliding_eval((s - h, level))[0] + self.sliding_eval((s + h, level))[0])

    def one_sided_sliding_speed(self, s: float, side: int) -> float:
        level = self.require_graph()
        h = 1e-7 * (1.0 + abs(s))
        return self.sliding_eval((s + side * h, level))[0]

    # -- segmentation --------------------------------------------------------
    def _sign_kind(self, s: float) -> Kind:
        level = self.require_graph()
        lx = self.lie_fn("X", 1)(s, level)
        ly = self.lie_fn("Y", 1)(s, level)
        if lx * ly > 0:
            return Kind.SEWING
        if lx < 0 < ly:
            return Kind.SLIDING
        if ly < 0 < lx:
            return Kind.ESCAPING
        return Kind.TANGENCY

    def segment_sigma(self, a: float, b: float, n: int = 400) -> Segmentation:
        """Split Sigma between abscissae ``a`` and ``b`` into maximal intervals of constant kind."""
        level = self.require_graph()
        if n < 2:
            raise ValueError("need at least 2 samples")
        if not a < b:
            raise ValueError("need a < b")
        xs = np.linspace(a, b, n)
        for s in xs:
            self._check_on_sigma(float(s), level)
        gx = self.lie_fn("X", 1)
        gy = self.lie_fn("Y", 1)
        roots = []
        for g in (gx, gy):
            vals = [g(float(s), level) for s in xs]
            for i in range(n - 1):
                v0, v1 = vals[i], vals[i + 1]
                if v0 == 0.0:
                    roots.append(float(xs[i]))
                elif v0 * v1 < 0:
                    roots.append(_bisect(lambda s: g(s, level), float(xs[i]), float(xs[i + 1])))
        roots = sorted(r for r in roots if a < r < b)
        merged: list[float] = []
        for r in roots:
            if merged and abs(r - merged[-1]) <= 1e-9:
                continue
            merged.append(r)
        cuts = [a] + merged + [b]
        intervals: list[Interval] = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            kind = self._sign_kind(0.5 * (lo + hi))
            if intervals and intervals[-1].kind == kind:
                intervals[-1] = Interval(intervals[-1].a, hi, kind)
            else:
                intervals.append(Interval(lo, hi, kind))
        boundaries = [self.classify_point((iv.b, level)) for iv in intervals[:-1]]
        return Segmentation(intervals, boundaries)


def _bisect(g: Callable[[float], float], lo: float, hi: float, xtol: float = BOUNDARY_XTOL) -> float:
    glo = g(lo)
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sliding_geometric(system: FilippovSystem, p) -> tuple[float, float]:
    """Independent route to the sliding vector: m - q on the segment [q+Y(q), q+X(q)].

    Solves <lam X + (1 - lam) Y, grad f> = 0 for lam by bracketing on [0, 1]
    rather than using the closed form.
    """
    x, y = p
    X = np.array(system.field_fn("X")(x, y))
    Y = np.array(system.field_fn("Y")(x, y))
    g = np.array([system.grad_f[0](x, y), system.grad_f[1](x, y)])
    q = np.array([x, y])

    def normal(lam: float) -> float:
        m = lam * (q + X) + (1 - lam) * (q + Y)
        return float(np.dot(m - q, g))

    lam = _bisect(normal, 0.0, 1.0, xtol=1e-16)
    m = lam * (q + X) + (1 - lam) * (q + Y)
    return tuple(m - q)
