"""Limit sets of global trajectories, and evidence about invariant and minimal sets.

Everything here is numerical evidence over finite horizons and finitely many
branches; reports say so (``truncated``, ``"evidence"`` labels) rather than
claiming more than was computed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.stats import qmc

from . import expr as ex
from .filippov import FilippovSystem, Kind, Visibility, _bisect
from .flow import (
    Deterministic, GlobalTrajectory, IntegrationOptions, Regime, enumerate_branches, integrate_global,
)

DEDUP_TOL = 1e-5
RECURRENCE_TOL = 1e-6
SECTION_TOL = 1e-6
MAX_PERIOD_K = 32
REPEATS = 3
EQ_RESIDUAL_TOL = 1e-10
SINGULAR_CONTRACTION = 0.5
GRAPH_APPROACH = 1e-4
GRAPH_NEIGHBOURHOOD = 0.05
CYCLE_FIELD_TOL = 1e-8
REGION_MARGIN = 1e-7
ARRIVAL_TOL = 1e-6
CLOSURE_TOL = 1e-6

KINDS = ("equilibrium", "periodic-orbit", "smooth-graph", "pseudo-cycle", "pseudo-graph",
         "singular-tangency", "unresolved")


# ---------------------------------------------------------------------------
# crossing sequences

@dataclass(frozen=True)
class CrossingRecord:
    time: float
    abscissa: float
    direction: str  # up-to-down | down-to-up | tangential
    regime_after: Optional[Regime]
    point: tuple[float, float]


def crossing_sequence(traj: GlobalTrajectory) -> list[CrossingRecord]:
    """One record per event on Sigma, in time order.

    Arrivals from a smooth regime are labelled by the side they come from;
    touches, and the ends of sliding arcs, are ``tangential``.
    """
    out = []
    arcs = traj.arcs
    for i, arc in enumerate(arcs):
        ev = arc.end_event
        if ev is None or ev.kind not in ("sigma-hit", "sliding-boundary"):
            continue
        if ev.tangential or arc.regime is Regime.S:
            direction = "tangential"
        elif arc.regime is Regime.X:
            direction = "up-to-down"
        else:
            direction = "down-to-up"
        after = arcs[i + 1].regime if i + 1 < len(arcs) else None
        out.append(CrossingRecord(traj.signed_time(ev.time), ev.point[0], direction, after, ev.point))
    return out


# ---------------------------------------------------------------------------
# reports

@dataclass
class LimitSetReport:
    kind: str
    support: dict
    residuals: dict
    horizon: float
    truncated: bool = False
    branch_id: str = ""
    # sampled geometry used for deduplication, not serialised
    curve: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown limit-set kind {self.kind!r}")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "support": self.support,
            "residuals": self.residuals,
            "horizon": self.horizon,
            "truncated": self.truncated,
            "branchId": self.branch_id,
        }


def _unresolved(T, traj, *why) -> LimitSetReport:
    return LimitSetReport("unresolved", {"diagnostics": list(why) + list(traj.diagnostics)}, {}, T,
                          traj.truncated, traj.branch_id)


def _window_arcs(traj: GlobalTrajectory, t_w: float):
    return [a for a in traj.arcs if a.times[-1] >= t_w]


def _dense(arcs, t_w: float, per_step: int = 16) -> np.ndarray:
    rows = [r for a in arcs for r in a.dense_points(per_step) if r[0] >= t_w]
    return np.array(rows, dtype=float).reshape(-1, 3)


def _jacobian(sys: FilippovSystem, which: str):
    w = sys.X if which == "X" else sys.Y
    fns = [sys._fn(("J", which, i, v), ex.differentiate(comp, v))
           for i, comp in enumerate((w.first, w.second)) for v in ("x", "y")]
    return lambda x, y: [[fns[0](x, y), fns[1](x, y)], [fns[2](x, y), fns[3](x, y)]]


def newton_equilibrium(sys: FilippovSystem, which: str, p, iters: int = 30) -> Optional[tuple[float, float]]:
    """Zero of field ``which`` near ``p`` by Newton's method, or None."""
    W = sys.field_fn(which)
    J = _jacobian(sys, which)
    x, y = float(p[0]), float(p[1])
    for _ in range(iters):
        a, b = W(x, y)
        (j11, j12), (j21, j22) = J(x, y)
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            return None
        dx = (a * j22 - b * j12) / det
        dy = (j11 * b - j21 * a) / det
        x, y = x - dx, y - dy
        if not (math.isfinite(x) and math.isfinite(y)):
            return None
        if math.hypot(dx, dy) <= 1e-15 * (1.0 + math.hypot(x, y)):
            break
    return x, y


def singular_points(sys: FilippovSystem, a: float, b: float, n: int = 400) -> list[tuple[float, float]]:
    """Points of Sigma in (a, b) that are invisible tangencies of both X and Y."""
    level = sys.require_graph()
    gx = sys.lie_fn("X", 1)
    xs = np.linspace(a, b, n)
    vals = [gx(float(s), level) for s in xs]
    roots = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            roots.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(_bisect(lambda s: gx(s, level), float(xs[i]), float(xs[i + 1])))
    out = []
    for r in roots:
        if not sys.is_tangency("Y", r, level):
            continue
        cls = sys.classify_point((r, level))
        if cls.singular:
            out.append((r, level))
    return out


# ---------------------------------------------------------------------------
# the decision ladder

def _try_equilibrium(sys, traj, T, t_w) -> Optional[LimitSetReport]:
    last = traj.arcs[-1]
    if last.regime is Regime.R:
        start = last.start_event
        p = last.end
        if start is not None and start.kind == "equilibrium-stall":
            which = start.reason
            res = math.hypot(*sys.field_fn(which)(*p))
            return LimitSetReport("equilibrium", {"of": which, "point": list(p)},
                                  {"field_norm": res, "tolerance": EQ_RESIDUAL_TOL}, T, traj.truncated,
                                  traj.branch_id, curve=np.array([p]))
        return None
    if last.regime is Regime.S:
        return None
    which = last.regime.value
    end = last.end
    e = newton_equilibrium(sys, which, end)
    if e is None:
        return None
    res = math.hypot(*sys.field_fn(which)(*e))
    side = sys.fx(*e)
    if res > EQ_RESIDUAL_TOL or (which == "X" and side < 0) or (which == "Y" and side > 0):
        return None
    pts = _dense([last], max(t_w, last.times[0]))
    d = np.hypot(pts[:, 1] - e[0], pts[:, 2] - e[1])
    if len(d) < 3 or d[-1] > 1e-3 or d[-1] > 0.1 * d[0]:
        return None
    return LimitSetReport("equilibrium", {"of": which, "point": list(e)},
                          {"field_norm": res, "distance": float(d[-1]), "tolerance": EQ_RESIDUAL_TOL}, T,
                          traj.truncated, traj.branch_id, curve=np.array([e]))


def _try_pseudo_rest(sys, traj, T) -> Optional[LimitSetReport]:
    last = traj.arcs[-1]
    start = last.start_event
    if last.regime is not Regime.R or start is None or start.kind != "sliding-boundary":
        return None
    p = last.end
    if start.reason == "pseudo-equilibrium":
        speed = abs(sys.sliding_speed(p[0]))
        # a single attracting pseudo-equilibrium: the degenerate pseudo-graph
        return LimitSetReport("pseudo-graph", {"equilibria": [], "pseudo_equilibria": [list(p)], "arcs": 0,
                                               "crossings": 0},
                              {"sliding_speed": speed, "tolerance": 1e-9}, T, traj.truncated, traj.branch_id,
                              curve=np.array([p]))
    return None


def _try_singular(sys, traj, T, t_w, recs) -> Optional[LimitSetReport]:
    last = traj.arcs[-1]
    if last.regime is Regime.R and last.start_event is not None and last.start_event.kind == "sigma-hit":
        p = last.end
        if sys.sigma_level is not None and sys.classify_point(p).singular:
            return LimitSetReport("singular-tangency", {"point": list(p)}, {"distance": 0.0, "tolerance": 0.0},
                                  T, traj.truncated, traj.branch_id, curve=np.array([p]))
    win = [r for r in recs if r.time >= t_w and r.direction != "tangential"]
    if len(win) < 3 or sys.sigma_level is None:
        return None
    xs = [r.abscissa for r in win]
    lo, hi = min(xs), max(xs)
    pad = 0.1 * (hi - lo) + 1e-9
    for c in singular_points(sys, lo - pad, hi + pad):
        d = [abs(a - c[0]) for a in xs]
        # legs of a fold parabola return at equal distance, so only ask for no growth
        if not all(d2 <= d1 * (1 + 1e-9) for d1, d2 in zip(d, d[1:])):
            continue
        contraction = d[-1] / d[0]
        if contraction > SINGULAR_CONTRACTION:
            continue
        ts = np.array([r.time for r in win])
        rate = -float(np.polyfit(ts, np.log(np.maximum(d, 1e-300)), 1)[0])
        return LimitSetReport("singular-tangency", {"point": list(c)},
                              {"distance": d[-1], "contraction": contraction, "rate": rate,
                               "crossings": len(win), "tolerance": SINGULAR_CONTRACTION},
                              T, traj.truncated, traj.branch_id, curve=np.array([c]))
    return None


def _section_returns(arc, t_w: float, anchor, normal) -> list[tuple[float, tuple[float, float]]]:
    def g(p):
        return (p[0] - anchor[0]) * normal[0] + (p[1] - anchor[1]) * normal[1]

    out = []
    for st in arc.steps:
        if st.t1 <= t_w:
            continue
        ts = np.linspace(st.t0, st.t1, 9)
        vals = [g(st(t)) for t in ts]
        for j in range(8):
            if vals[j] < 0 <= vals[j + 1] and ts[j + 1] > t_w:
                t = brentq(lambda s: g(st(s)), ts[j], ts[j + 1], xtol=1e-14)
                p = st(t)
                if math.hypot(p[0] - anchor[0], p[1] - anchor[1]) < 0.25 * (1.0 + math.hypot(*anchor)):
                    out.append((t, p))
    return out


def _try_periodic(sys, traj, T, t_w, recs) -> Optional[LimitSetReport]:
    last = traj.arcs[-1]
    if last.regime not in (Regime.X, Regime.Y) or last.times[0] > t_w or any(r.time >= t_w for r in recs):
        return None
    which = last.regime.value
    # anchor at the first window sample
    pts = _dense([last], t_w)
    anchor = (float(pts[0, 1]), float(pts[0, 2]))
    w = sys.field_fn(which)(*anchor)
    nw = math.hypot(*w)
    if nw == 0.0:
        return None
    returns = _section_returns(last, t_w + 1e-9, anchor, (w[0] / nw, w[1] / nw))
    if len(returns) < REPEATS:
        return None
    (t1, p1), (t2, p2) = returns[-2], returns[-1]
    delta = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
    if delta > SECTION_TOL:
        return None
    period = t2 - t1
    curve = _dense([last], t1, per_step=32)[:, 1:]
    return LimitSetReport("periodic-orbit", {"of": which, "section_point": list(p2), "period": period},
                          {"section_delta": delta, "returns": len(returns), "tolerance": SECTION_TOL},
                          T, traj.truncated, traj.branch_id, curve=curve)


def _cycle_field_min(sys, arcs) -> float:
    m = math.inf
    for a in arcs:
        if a.regime is Regime.R:
            return 0.0
        for _, x, y in a.dense_points(4):
            if a.regime is Regime.S:
                v = abs(sys.sliding_speed(x))
            else:
                v = math.hypot(*sys.field_fn(a.regime.value)(x, y))
            m = min(m, v)
    return m


def _try_pseudo_cycle(sys, traj, T, t_w, recs) -> Optional[LimitSetReport]:
    win = [r for r in recs if r.time >= t_w]
    for k in range(1, MAX_PERIOD_K + 1):
        if len(win) < REPEATS * k:
            break
        tail = win[-REPEATS * k:]
        if any(tail[i].direction != tail[i - k].direction for i in range(k, len(tail))):
            continue
        err = max(abs(tail[i].abscissa - tail[i - k].abscissa) for i in range(k, len(tail)))
        if err > RECURRENCE_TOL:
            continue
        period = (tail[-1].time - tail[-1 - (REPEATS - 1) * k].time) / (REPEATS - 1)
        t_from = abs(tail[-1 - k].time)
        arcs = [a for a in traj.arcs if a.times[-1] > t_from and a.times[0] < abs(tail[-1].time)]
        fmin = _cycle_field_min(sys, arcs)
        if fmin <= CYCLE_FIELD_TOL:
            continue
        curve = np.concatenate([_dense([a], t_from, per_step=32)[:, 1:] for a in arcs])
        return LimitSetReport("pseudo-cycle", {"crossings": [r.abscissa for r in tail[-k:]], "k": k,
                                               "period": abs(period)},
                              {"recurrence": err, "min_field": fmin, "tolerance": RECURRENCE_TOL},
                              T, traj.truncated, traj.branch_id, curve=curve)
    return None


def _try_graph(sys, traj, T, t_w, recs) -> Optional[LimitSetReport]:
    arcs = [a for a in _window_arcs(traj, t_w) if a.regime in (Regime.X, Regime.Y)]
    found: list[tuple[str, tuple[float, float]]] = []
    for a in arcs:
        pts = _dense([a], t_w)
        if len(pts) < 3:
            continue
        W = sys.field_fn(a.regime.value)
        speed = np.array([math.hypot(*W(x, y)) for _, x, y in pts])
        mins = [i for i in range(1, len(speed) - 1) if speed[i] <= speed[i - 1] and speed[i] <= speed[i + 1]]
        for i in mins:
            e = newton_equilibrium(sys, a.regime.value, pts[i, 1:])
            if e is None or math.hypot(*W(*e)) > EQ_RESIDUAL_TOL:
                continue
            if math.hypot(e[0] - pts[i, 1], e[1] - pts[i, 2]) > GRAPH_NEIGHBOURHOOD:
                continue
            if not any(math.hypot(e[0] - q[0], e[1] - q[1]) <= DEDUP_TOL for _, q in found):
                found.append((a.regime.value, e))
    if not found:
        return None
    # dwell times grow geometrically along a graph, so a window of fixed fraction holds only a few
    # visits whatever the horizon; the dwell history therefore uses the whole trajectory
    pts = _dense(traj.arcs, 0.0)
    evidence, visits = [], 0
    for which, e in found:
        d = np.hypot(pts[:, 1] - e[0], pts[:, 2] - e[1])
        inside = d <= GRAPH_NEIGHBOURHOOD
        dwell, start = [], None
        for i, flag in enumerate(inside):
            if flag and start is None:
                start = pts[i, 0]
            elif not flag and start is not None:
                dwell.append(float(pts[i, 0] - start))
                start = None
        visits += len(dwell)
        closest = float(d[pts[:, 0] >= t_w].min())
        evidence.append((which, e, closest, dwell, all(b > a for a, b in zip(dwell, dwell[1:]))))
    growing = visits >= REPEATS and all(ev[4] for ev in evidence) and any(len(ev[3]) >= 2 for ev in evidence)
    if not growing or not any(ev[2] <= GRAPH_APPROACH for ev in evidence):
        return None
    crossings = sum(1 for r in recs if r.time >= t_w)
    kind = "pseudo-graph" if crossings else "smooth-graph"
    support = {"equilibria": [{"of": w, "point": list(e), "closest": m, "dwell": dw}
                              for w, e, m, dw, _ in evidence],
               "pseudo_equilibria": [], "crossings": crossings}
    res = {"closest_approach": min(ev[2] for ev in evidence),
           "field_norm": max(math.hypot(*sys.field_fn(w)(*e)) for w, e, *_ in evidence),
           "tolerance": GRAPH_APPROACH}
    return LimitSetReport(kind, support, res, T, traj.truncated, traj.branch_id,
                          curve=np.array([e for _, e, *_ in evidence]))


def classify_trajectory(sys: FilippovSystem, traj: GlobalTrajectory, settle: float = 0.5) -> LimitSetReport:
    """Limit-set report for one computed trajectory, using its last ``(1 - settle)`` fraction."""
    if not 0 < settle < 1:
        raise ValueError("settle fraction must lie in (0, 1)")
    run_sys = sys if traj.direction == "forward" else sys.negated()
    T = float(traj.total_time)
    t_w = settle * T
    last = traj.arcs[-1]
    if last.end_event is not None and last.end_event.kind == "domain-exit":
        return _unresolved(T, traj, f"trajectory left the domain at {last.end}")
    recs = crossing_sequence(traj)
    recs = [CrossingRecord(abs(r.time), r.abscissa, r.direction, r.regime_after, r.point) for r in recs]
    for rung in (lambda: _try_equilibrium(run_sys, traj, T, t_w),
                 lambda: _try_pseudo_rest(run_sys, traj, T),
                 lambda: _try_singular(run_sys, traj, T, t_w, recs),
                 lambda: _try_periodic(run_sys, traj, T, t_w, recs),
                 lambda: _try_pseudo_cycle(run_sys, traj, T, t_w, recs),
                 lambda: _try_graph(run_sys, traj, T, t_w, recs)):
        rep = rung()
        if rep is not None:
            return rep
    n_win = sum(1 for r in recs if r.time >= t_w)
    why = "no rung of the ladder matched"
    if n_win < REPEATS and not (last.regime in (Regime.X, Regime.Y) and last.times[0] <= t_w):
        why = f"horizon too short: {n_win} Sigma events in the window"
    return _unresolved(T, traj, why)


def classify_omega(sys: FilippovSystem, p0, T: float, policy=Deterministic("X"), settle: float = 0.5,
                   opts: Optional[IntegrationOptions] = None, direction: str = "forward") -> LimitSetReport:
    """Omega-limit report (alpha-limit for ``direction="backward"``) of one global trajectory."""
    if not 0 < settle < 1:
        raise ValueError("settle fraction must lie in (0, 1)")
    traj = integrate_global(sys, p0, T, policy, direction=direction, opts=opts)
    return classify_trajectory(sys, traj, settle)


def _curve_distance(p: np.ndarray, curve: np.ndarray) -> float:
    if len(curve) == 1:
        return float(np.hypot(*(p - curve[0])))
    a, b = curve[:-1], curve[1:]
    ab = b - a
    den = np.einsum("ij,ij->i", ab, ab)
    den[den == 0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / den, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.hypot(*(proj - p).T)))


def same_limit_set(r1: LimitSetReport, r2: LimitSetReport, tol: float = DEDUP_TOL) -> bool:
    if r1.kind != r2.kind:
        return False
    if r1.kind == "unresolved":
        return r1.support == r2.support
    if r1.kind == "pseudo-cycle":
        a, b = r1.support["crossings"], r2.support["crossings"]
        return len(a) == len(b) and all(min(abs(u - v) for v in b) <= tol for u in a) and \
            all(min(abs(u - v) for u in a) <= tol for v in b)
    if r1.curve is None or r2.curve is None:
        return r1.support == r2.support
    if len(r1.curve) <= len(r2.curve):
        small, big = r1.curve, r2.curve
    else:
        small, big = r2.curve, r1.curve
    probe = small[:: max(1, len(small) // 16)]
    return all(_curve_distance(p, big) <= tol for p in probe)


def omega_of_point(sys: FilippovSystem, p0, T: float, max_branches: int = 64, max_depth: int = 16,
                   settle: float = 0.5, opts: Optional[IntegrationOptions] = None,
                   direction: str = "forward") -> list[LimitSetReport]:
    """Union over enumerated branches through ``p0``, deduplicated; branch order decides which id is kept."""
    branches = enumerate_branches(sys, p0, T, max_branches, max_depth, direction=direction, opts=opts)
    truncated = any(b.truncated for b in branches)
    reports: list[LimitSetReport] = []
    for b in branches:
        r = classify_trajectory(sys, b, settle)
        if not any(same_limit_set(r, q) for q in reports):
            reports.append(r)
    for r in reports:
        r.truncated = r.truncated or truncated
    return reports


# ---------------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class RegionSpec:
    """``{a <= x <= b, lower(x) <= y <= upper(x)}``, or only its two boundary graphs
    thickened vertically by ``thickness`` when ``curve_only`` is set."""

    name: str
    a: float
    b: float
    lower: ex.Expr
    upper: ex.Expr
    curve_only: bool = False
    thickness: float = 0.0
    hub: Optional[tuple[float, float]] = None
    boundary_start: Optional[tuple[float, float]] = None
    boundary_policy: str = "Y"

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError(f"region {self.name!r}: empty x-interval [{self.a}, {self.b}]")
        lo, up = ex.compile_expr(self.lower), ex.compile_expr(self.upper)
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_up", up)
        for x in np.linspace(self.a, self.b, 101):
            if lo(float(x), 0.0) > up(float(x), 0.0) + 1e-12:
                raise ValueError(f"region {self.name!r}: lower boundary above upper boundary at x = {x:.6g}")

    def contains(self, x: float, y: float, margin: float = REGION_MARGIN) -> bool:
        if not self.a - margin <= x <= self.b + margin:
            return False
        xc = min(max(x, self.a), self.b)
        lo, up = self._lo(xc, 0.0), self._up(xc, 0.0)
        if self.curve_only:
            tau = self.thickness + margin
            return abs(y - lo) <= tau or abs(y - up) <= tau
        return lo - margin <= y <= up + margin

    def sample(self, n: int) -> list[tuple[float, float]]:
        """``n`` points from an unscrambled Halton sequence mapped into the region."""
        if n < 1:
            raise ValueError("need at least one sample")
        u = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
        out = []
        for u0, u1 in u:
            x = self.a + float(u0) * (self.b - self.a)
            lo, up = self._lo(x, 0.0), self._up(x, 0.0)
            if self.curve_only:
                y = lo if u1 < 0.5 else up
            else:
                y = lo + float(u1) * (up - lo)
            out.append((x, y))
        return out

    def boundary_polyline(self, n: int = 2000) -> np.ndarray:
        xs = np.linspace(self.a, self.b, n)
        lo = [(float(x), self._lo(float(x), 0.0)) for x in xs]
        up = [(float(x), self._up(float(x), 0.0)) for x in xs[::-1]]
        return np.array(lo + up + [lo[0]])


def _lambda(name="Lambda", **kw) -> RegionSpec:
    return RegionSpec(name, -1.0, 1.0, ex.parse("x^4/2 - x^2/2"), ex.parse("1 - x^2"), hub=(0.0, 0.0),
                      boundary_start=(-1.0, 0.0), **kw)


REGIONS = {
    "Lambda": _lambda(),
    "Lambda-boundary": _lambda("Lambda-boundary", curve_only=True, thickness=1e-6),
    "Lambda-right": RegionSpec("Lambda-right", 0.0, 1.0, ex.parse("x^4/2 - x^2/2"), ex.parse("1 - x^2"),
                               hub=(0.0, 0.0)),
}


def region_from_text(text: str) -> RegionSpec:
    """A named region, or ``"lower ; upper ; a ; b"`` with boundaries as expressions in x."""
    text = text.strip()
    if text in REGIONS:
        return REGIONS[text]
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != 4:
        raise ValueError(f"region must be one of {sorted(REGIONS)} or 'lower ; upper ; a ; b', got {text!r}")
    lower, upper = ex.fold(ex.parse(parts[0])), ex.fold(ex.parse(parts[1]))
    for e in (lower, upper):
        if any(isinstance(v, ex.Var) and v.name == "y" for v in ex.walk(e)):
            raise ValueError("region boundaries may depend on x only")
    try:
        a, b = float(parts[2]), float(parts[3])
    except ValueError:
        raise ValueError(f"bad x-interval {parts[2]!r}, {parts[3]!r}") from None
    return RegionSpec("custom", a, b, lower, upper)


# ---------------------------------------------------------------------------
# invariance, minimality, non-density

@dataclass
class InvarianceResult:
    verdict: str  # invariant-evidence | violated
    samples: int
    branches: int
    truncated: bool
    witness: Optional[dict] = None
    note: str = "sampling-based evidence, not a proof"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "samples": self.samples, "branches": self.branches,
                "truncated": self.truncated, "witness": self.witness, "note": self.note}


def _first_exit(region: RegionSpec, traj: GlobalTrajectory):
    prev = None
    for arc in traj.arcs:
        for t, x, y in arc.dense_points(8):
            if not region.contains(x, y):
                return {"branch": traj.branch_id, "exit_point": [x, y], "time": traj.signed_time(t),
                        "last_inside": list(prev) if prev else None, "regime": arc.regime.value}
            prev = (x, y)
    return None


def check_invariance(sys: FilippovSystem, region: RegionSpec, n: int, T: float, max_branches: int = 64,
                     max_depth: int = 16, opts: Optional[IntegrationOptions] = None) -> InvarianceResult:
    if n < 1:
        raise ValueError("need at least one sample")
    total, truncated = 0, False
    for i, p in enumerate(region.sample(n)):
        if not sys.in_domain(*p):
            continue
        best = None
        for b in enumerate_branches(sys, p, T, max_branches, max_depth, opts=opts):
            total += 1
            truncated = truncated or b.truncated
            w = _first_exit(region, b)
            # the earliest exit among this sample's branches is the clearest witness
            if w is not None and (best is None or abs(w["time"]) < abs(best["time"])):
                best = w
        if best is not None:
            best.update(sample_index=i, sample=list(p))
            return InvarianceResult("violated", i + 1, total, truncated, best)
    return InvarianceResult("invariant-evidence", n, total, truncated)


POLICY_ORDER = ("S", "Y", "X")


def _arrival(traj: GlobalTrajectory, hub, tol: float) -> Optional[float]:
    for arc in traj.arcs:
        pts = list(zip(arc.times, arc.xs, arc.ys))
        if arc.end_event is not None:
            pts.append((arc.end_event.time, *arc.end_event.point))
        for t, x, y in pts:
            if math.hypot(x - hub[0], y - hub[1]) <= tol:
                return t
    return None


def reach_hub(sys: FilippovSystem, p, hub, T: float, direction: str = "forward",
              opts: Optional[IntegrationOptions] = None):
    """First (policy, arrival time, trajectory) among the deterministic policies, or None."""
    for pref in POLICY_ORDER:
        traj = integrate_global(sys, p, T, Deterministic(pref), direction=direction, opts=opts)
        t = _arrival(traj, hub, ARRIVAL_TOL)
        if t is not None:
            return pref, t, traj
    return None


def boundary_closure(sys: FilippovSystem, region: RegionSpec, T: float,
                     opts: Optional[IntegrationOptions] = None) -> Optional[dict]:
    """Run the boundary trajectory from ``region.boundary_start`` until it first returns there."""
    if region.boundary_start is None:
        return None
    b0 = region.boundary_start
    traj = integrate_global(sys, b0, T, Deterministic(region.boundary_policy), opts=opts)
    for r in crossing_sequence(traj):
        if r.time > 1e-6 and math.hypot(r.point[0] - b0[0], r.point[1] - b0[1]) <= 1e-3:
            err = math.hypot(r.point[0] - b0[0], r.point[1] - b0[1])
            return {"period": r.time, "closure": err, "pass": err <= CLOSURE_TOL, "branch": traj.branch_id}
    return {"period": None, "closure": None, "pass": False, "branch": traj.branch_id,
            "diagnostic": f"no return to {list(b0)} within T = {T}"}


def minimality_evidence(sys: FilippovSystem, region: RegionSpec, n: int, T: float, max_branches: int = 16,
                        max_depth: int = 16, opts: Optional[IntegrationOptions] = None) -> dict:
    """Invariance sampling, connectivity of sampled pairs through the hub, and boundary closure."""
    if region.hub is None:
        raise ValueError(f"region {region.name!r} has no designated hub point")
    inv = check_invariance(sys, region, n, T, max_branches, max_depth, opts)
    pts = region.sample(2 * n)
    pairs = list(zip(pts[:n], pts[n:]))
    failures = []
    for i, (p1, p2) in enumerate(pairs):
        fw = reach_hub(sys, p1, region.hub, T, "forward", opts)
        bw = reach_hub(sys, p2, region.hub, T, "backward", opts)
        if fw is None or bw is None:
            failures.append({"pair": i, "first": list(p1), "second": list(p2),
                             "forward_reached": fw is not None, "backward_reached": bw is not None})
    conn = {"pairs": n, "connected": n - len(failures), "failures": failures[:5], "pass": not failures}
    closure = boundary_closure(sys, region, T, opts)
    checks = {"invariance": inv.to_json() | {"pass": inv.verdict == "invariant-evidence"},
              "connectivity": conn,
              "boundary_closure": closure if closure is not None else {"pass": False,
                                                                        "diagnostic": "no boundary start"}}
    # a check that could not run only makes the verdict partial; a check that ran and failed decides it
    ran = [c["pass"] for name, c in checks.items() if not (name == "boundary_closure" and closure is None)]
    verdict = "fail" if not all(ran) else ("partial" if closure is None else "pass")
    return {"region": region.name, "samples": n, "horizon": T, "checks": checks, "verdict": verdict,
            "note": "minimality evidence, not a proof"}


@dataclass
class NonDenseWitness:
    found: bool
    center: Optional[tuple[float, float]]
    radius: float
    r_min: float
    samples: int
    gamma1_policy: Optional[str]
    diagnostic: str = ""

    def to_json(self) -> dict:
        return {"found": self.found, "center": list(self.center) if self.center else None,
                "radius": self.radius, "r_min": self.r_min, "trajectory_samples": self.samples,
                "gamma1_policy": self.gamma1_policy, "diagnostic": self.diagnostic}


def _truncate_at(traj: GlobalTrajectory, t_end: float) -> np.ndarray:
    rows = [r for a in traj.arcs for r in a.dense_points(32) if r[0] <= t_end + 1e-12]
    return np.array([(x, y) for _, x, y in rows]).reshape(-1, 2)


def non_dense_witness(sys: FilippovSystem, region: RegionSpec, q, T: float, r_min: float = 0.05,
                      grid: int = 100, opts: Optional[IntegrationOptions] = None):
    """Gamma = Gamma1 (q to the hub) + Gamma0 (boundary loop), and an interior disk Gamma misses.

    Returns ``(points of Gamma, NonDenseWitness)``.
    """
    if region.hub is None or region.boundary_start is None:
        raise ValueError(f"region {region.name!r} needs a hub and a boundary start")
    if not region.contains(*q):
        raise ValueError(f"{tuple(q)} is not in region {region.name!r}")
    hit = reach_hub(sys, q, region.hub, T, "forward", opts)
    if hit is None:
        return np.empty((0, 2)), NonDenseWitness(False, None, 0.0, r_min, 0, None,
                                                 f"no trajectory from {tuple(q)} reaches the hub within T = {T}")
    pref, t_hub, traj1 = hit
    gamma1 = _truncate_at(traj1, t_hub)
    closure = boundary_closure(sys, region, T, opts)
    period = closure["period"] if closure and closure["period"] else T
    traj0 = integrate_global(sys, region.boundary_start, period, Deterministic(region.boundary_policy), opts=opts)
    gamma = np.concatenate([gamma1, _truncate_at(traj0, period)])
    tree = cKDTree(gamma)
    bdry = cKDTree(region.boundary_polyline())
    xs = np.linspace(region.a, region.b, grid)
    ys_lo = min(region._lo(float(x), 0.0) for x in xs)
    ys_hi = max(region._up(float(x), 0.0) for x in xs)
    ys = np.linspace(ys_lo, ys_hi, grid)
    gx, gy = np.meshgrid(xs, ys)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    inside = np.array([region.contains(x, y, margin=0.0) for x, y in centers])
    centers = centers[inside]
    d_traj, _ = tree.query(centers)
    d_bdry, _ = bdry.query(centers)
    radius = np.minimum(d_traj, d_bdry)
    best = int(np.argmax(radius))
    r = float(radius[best])
    c = (float(centers[best][0]), float(centers[best][1]))
    if r < r_min:
        return gamma, NonDenseWitness(False, None, r, r_min, len(gamma), pref,
                                      f"largest uncovered interior disk has radius {r:.6g} < {r_min}")
    return gamma, NonDenseWitness(True, c, r, r_min, len(gamma), pref)


__all__ = [
    "CrossingRecord", "crossing_sequence", "LimitSetReport", "classify_trajectory", "classify_omega",
    "omega_of_point", "same_limit_set", "RegionSpec", "REGIONS", "region_from_text", "InvarianceResult",
    "check_invariance", "minimality_evidence", "reach_hub", "boundary_closure", "NonDenseWitness",
    "non_dense_witness", "newton_equilibrium", "singular_points", "KINDS",
]
