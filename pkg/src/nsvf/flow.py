"""Event-driven integration of global trajectories of Z = (X, Y).

Smooth arcs follow X (on f >= 0) or Y (on f <= 0) and stop at Sigma; on
Sigma the local rules decide the next regime:

* sewing points are crossed;
* sliding points slide forward along Sigma with the Filippov field;
* escaping points and regular tangencies branch (X, Y or slide);
* singular tangencies (invisible for both fields) are rest points.

Backward time is forward time of the reversed system -Z.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .filippov import (
    FilippovSystem, Kind, SigmaPointClass, SlidingUndefined, SystemError_, Visibility, _bisect,
    PSEUDO_EQ_TOL,
)
from .rk import DenseStep, StepControl, StepUnderflow, locate_event, step_smooth

SIGMA_HIT_TOL = 1e-10
TOUCH_TOL = 1e-8
SNAP_TOL = 1e-9
STALL_TOL = 1e-10
CHATTER_EVENTS = 50
CHATTER_TIME = 1e-10
MAX_EVENTS = 1_000_000
SUBSTEPS = 8
ORDER = "XYS"


class Regime(str, enum.Enum):
    X = "X"
    Y = "Y"
    S = "S"
    R = "R"


class FlowError(ArithmeticError):
    pass


class ClassificationInconsistency(FlowError):
    pass


class RunawayEvents(FlowError):
    pass


@dataclass(frozen=True)
class Event:
    """kind: sigma-hit | sliding-boundary | equilibrium-stall | domain-exit | horizon | chatter."""

    kind: str
    time: float
    point: tuple[float, float]
    regime: Optional[Regime] = None  # regime of the arc that produced the event
    reason: str = ""
    tangential: bool = False


@dataclass
class TrajectoryArc:
    regime: Regime
    times: list[float]
    xs: list[float]
    ys: list[float]
    start_event: Optional[Event] = None
    end_event: Optional[Event] = None
    steps: list[DenseStep] = field(default_factory=list, repr=False)

    @property
    def start(self) -> tuple[float, float]:
        return self.xs[0], self.ys[0]

    @property
    def end(self) -> tuple[float, float]:
        return self.xs[-1], self.ys[-1]

    @property
    def duration(self) -> float:
        return self.times[-1] - self.times[0]

    def dense_points(self, per_step: int = 8) -> list[tuple[float, float, float]]:
        """Samples including interior points of each step's interpolant."""
        if not self.steps:
            return list(zip(self.times, self.xs, self.ys))
        out = []
        for st in self.steps:
            for j in range(per_step):
                t = st.t0 + st.h * j / per_step
                x, y = st(t)
                # a sliding step integrates the abscissa only
                out.append((t, x, self.ys[0]) if self.regime is Regime.S else (t, x, y))
        out.append((self.times[-1], self.xs[-1], self.ys[-1]))
        return out


@dataclass
class GlobalTrajectory:
    arcs: list[TrajectoryArc]
    branch_id: str = ""
    direction: str = "forward"
    total_time: float = 0.0
    truncated: bool = False
    defaulted_decisions: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def events(self) -> list[Event]:
        return [a.end_event for a in self.arcs if a.end_event is not None]

    @property
    def end(self) -> tuple[float, float]:
        return self.arcs[-1].end

    def signed_time(self, s: float) -> float:
        return s if self.direction == "forward" else -s

    def samples(self) -> Iterable[tuple[float, float, float, Regime]]:
        for arc in self.arcs:
            for t, x, y in zip(arc.times, arc.xs, arc.ys):
                yield self.signed_time(t), x, y, arc.regime


# ---------------------------------------------------------------------------
# policies

@dataclass(frozen=True)
class Deterministic:
    prefer: str = "X"  # "X", "Y" or "S"

    def __post_init__(self):
        if self.prefer not in ORDER:
            raise ValueError(f"prefer must be one of X, Y, S (got {self.prefer!r})")


@dataclass(frozen=True)
class Scripted:
    choices: str


@dataclass(frozen=True)
class EnumerateAll:
    max_branches: int = 64
    max_depth: int = 16

    def __post_init__(self):
        if self.max_branches < 1 or self.max_depth < 1:
            raise ValueError("EnumerateAll bounds must be >= 1")


BranchPolicy = Union[Deterministic, Scripted, EnumerateAll]


def policy_from_name(name: str) -> BranchPolicy:
    names = {"prefer-x": "X", "prefer-y": "Y", "prefer-slide": "S"}
    if name == "enumerate":
        return EnumerateAll()
    if name not in names:
        raise ValueError(f"unknown policy {name!r}")
    return Deterministic(names[name])


# ---------------------------------------------------------------------------
# local continuation rules

@dataclass(frozen=True)
class Continuation:
    regime: Regime
    letter: str  # "X", "Y" or "S"
    slide_dir: int = 0  # +1 / -1 along x for sliding continuations


def _leading_sign(contact) -> int:
    if contact is None or contact.degenerate:
        return 0
    return 1 if contact.leading > 0 else -1


def _slide_side(sys: FilippovSystem, s: float, level: float) -> Optional[int]:
    """Direction (+1/-1) of a sliding continuation leaving ``s`` into an abutting
    sliding/escaping segment, or None when no segment abuts in the right sense."""
    h = 1e-7 * (1.0 + abs(s))
    for side in (-1, 1):
        q = s + side * h
        if not sys.in_domain(q, level):
            continue
        lx = sys.lie_fn("X", 1)(q, level)
        ly = sys.lie_fn("Y", 1)(q, level)
        if lx * ly >= 0:
            continue
        try:
            v = sys.sliding_eval((q, level))[0]
        except SlidingUndefined:
            continue
        if v * side > 0:
            return side
    return None


def continue_from(sys: FilippovSystem, p, cls: Optional[SigmaPointClass] = None) -> list[Continuation]:
    """Admissible forward continuations at a point of Sigma, in the fixed order X, Y, S.

    A single entry means the continuation is forced.
    """
    if cls is None:
        cls = sys.classify_point(p)
    x, y = cls.point
    level = sys.sigma_level
    if cls.kind is Kind.SEWING:
        return [Continuation(Regime.X, "X")] if cls.lie_x > 0 else [Continuation(Regime.Y, "Y")]
    if cls.kind is Kind.SLIDING:
        if cls.pseudo_equilibrium:
            return [Continuation(Regime.R, "S")]
        if level is None:
            raise SystemError_("sliding along a curved Sigma is not supported")
        v = sys.sliding_speed(x)
        return [Continuation(Regime.S, "S", 1 if v > 0 else -1)]
    if cls.kind is Kind.ESCAPING:
        out = [Continuation(Regime.X, "X"), Continuation(Regime.Y, "Y")]
        if cls.pseudo_equilibrium:
            out.append(Continuation(Regime.R, "S"))
        elif level is not None:
            v = sys.sliding_speed(x)
            out.append(Continuation(Regime.S, "S", 1 if v > 0 else -1))
        return out
    # tangency
    if cls.singular:
        return [Continuation(Regime.R, "R")]
    out = []
    # f along the W-orbit behaves like leading * t^r / r!: X needs it positive, Y negative
    if _leading_sign(cls.x_contact) > 0:
        out.append(Continuation(Regime.X, "X"))
    if _leading_sign(cls.y_contact) < 0:
        out.append(Continuation(Regime.Y, "Y"))
    if level is not None:
        side = _slide_side(sys, x, level)
        if side is not None:
            out.append(Continuation(Regime.S, "S", side))
    if not out:
        raise ClassificationInconsistency(f"no admissible continuation at {cls.point} ({cls})")
    return out


# ---------------------------------------------------------------------------
# the runner

@dataclass
class IntegrationOptions:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = 0.1


@dataclass
class _Cursor:
    s: float
    point: tuple[float, float]
    arcs: list[TrajectoryArc]
    branch: str = ""
    depth: int = 0
    defaulted: int = 0
    scripted_pos: int = 0
    events: int = 0
    recent: deque = field(default_factory=lambda: deque(maxlen=CHATTER_EVENTS))
    done: bool = False
    truncated: bool = False
    diagnostics: list[str] = field(default_factory=list)
    start_event: Optional[Event] = None

    def fork(self) -> "_Cursor":
        return replace(self, arcs=list(self.arcs), recent=deque(self.recent, maxlen=CHATTER_EVENTS),
                       diagnostics=list(self.diagnostics))


class _Engine:
    def __init__(self, sys: FilippovSystem, horizon: float, opts: IntegrationOptions):
        self.sys = sys
        self.T = horizon
        self.opts = opts
        self.level = sys.sigma_level

    # -- helpers -------------------------------------------------------------
    def _project(self, x: float, y: float) -> tuple[float, float]:
        if self.level is not None:
            return x, self.level
        for _ in range(3):
            fv = self.sys.fx(x, y)
            gx, gy = self.sys.grad_f[0](x, y), self.sys.grad_f[1](x, y)
            n2 = gx * gx + gy * gy
            x, y = x - fv * gx / n2, y - fv * gy / n2
        return x, y

    def _snap(self, x: float, y: float) -> tuple[float, float]:
        """Move a Sigma point onto a tangency abscissa lying within SNAP_TOL."""
        if self.level is None:
            return x, y
        for which in ("X", "Y"):
            g = self.sys.lie_fn(which, 1)
            lo, hi = x - SNAP_TOL, x + SNAP_TOL
            glo, ghi = g(lo, self.level), g(hi, self.level)
            if glo == 0.0:
                return lo, y
            if ghi == 0.0:
                return hi, y
            if glo * ghi < 0:
                return _bisect(lambda s: g(s, self.level), lo, hi, xtol=1e-16), y
        return x, y

    def _record_event(self, cur: _Cursor, ev: Event):
        cur.events += 1
        if cur.events > MAX_EVENTS:
            raise RunawayEvents(f"more than {MAX_EVENTS} events")
        cur.recent.append(ev.time)
        if len(cur.recent) == CHATTER_EVENTS and cur.recent[-1] - cur.recent[0] < CHATTER_TIME:
            cur.done = True
            cur.diagnostics.append(
                f"chatter: {CHATTER_EVENTS} events within {CHATTER_TIME:g} time units near {ev.point}")

    # -- arcs ----------------------------------------------------------------
    def _rest_arc(self, cur: _Cursor, start_event: Optional[Event]) -> TrajectoryArc:
        x, y = cur.point
        times = [cur.s, self.T] if self.T > cur.s else [cur.s]
        arc = TrajectoryArc(Regime.R, times, [x] * len(times), [y] * len(times), start_event,
                            Event("horizon", self.T, (x, y), Regime.R))
        cur.s = self.T
        cur.done = True
        return arc

    def _smooth_arc(self, cur: _Cursor, regime: Regime, start_event: Optional[Event]) -> TrajectoryArc:
        sys = self.sys
        which = regime.value
        side = 1.0 if regime is Regime.X else -1.0
        W = sys.field_fn(which)
        lie1 = sys.lie_fn(which, 1)
        fx = sys.fx

        def g(x, y):
            return side * fx(x, y)

        def dg(x, y):
            return side * lie1(x, y)

        ctl = StepControl(self.opts.rtol, self.opts.atol, self.opts.max_step)
        t0 = cur.s
        x, y = cur.point
        arc = TrajectoryArc(regime, [t0], [x], [y], start_event)
        t = t0
        while True:
            fv = W(x, y)
            if math.hypot(*fv) <= STALL_TOL:
                ev = Event("equilibrium-stall", t, (x, y), regime, reason=which)
                break
            if t >= self.T:
                ev = Event("horizon", t, (x, y), regime)
                break
            try:
                st = step_smooth(W, t, (x, y), ctl, h_limit=self.T - t, f0=fv)
            except StepUnderflow as err:
                raise FlowError(str(err)) from err
            hit = self._scan_smooth(st, g, dg, t0)
            if hit is not None:
                t_ev, (ex_, ey_), kind, tangential = hit
                if kind == "domain-exit":
                    ev = Event("domain-exit", t_ev, (ex_, ey_), regime)
                else:
                    px, py = self._snap(*self._project(ex_, ey_))
                    ev = Event("sigma-hit", t_ev, (px, py), regime, tangential=tangential)
                    ex_, ey_ = px, py
                if t_ev > st.t0:
                    arc.steps.append(_rescale(st, t_ev))
                if t_ev > arc.times[-1]:
                    arc.times.append(t_ev)
                    arc.xs.append(ex_)
                    arc.ys.append(ey_)
                else:
                    arc.xs[-1], arc.ys[-1] = ex_, ey_
                t, x, y = t_ev, ex_, ey_
                break
            arc.steps.append(st)
            t, (x, y) = st.t1, st.y1
            arc.times.append(t)
            arc.xs.append(x)
            arc.ys.append(y)
        arc.end_event = ev
        cur.s, cur.point = t, (x, y)
        return arc

    def _scan_smooth(self, st: DenseStep, g, dg, t_arc0: float):
        """Earliest of: Sigma crossing, tangential touch of Sigma, domain exit, inside the step."""
        sys = self.sys
        ts = [st.t0 + st.h * j / SUBSTEPS for j in range(SUBSTEPS + 1)]
        pts = [st.y0] + [st(t) for t in ts[1:-1]] + [st.y1]
        gs = [g(*p) for p in pts]
        for j in range(1, SUBSTEPS + 1):
            lo, hi = ts[j - 1], ts[j]
            if not sys.in_domain(*pts[j]):
                xmin, xmax, ymin, ymax = sys.domain

                def box(x, y):
                    return min(x - xmin, xmax - x, y - ymin, ymax - y)

                t_ev, p = locate_event(st, box, lo, hi, tol=1e-8)
                # a Sigma crossing earlier in the same sub-interval wins
                if gs[j - 1] > 0 and g(*p) < 0:
                    t_ev, p = locate_event(st, g, lo, t_ev, tol=SIGMA_HIT_TOL)
                    return t_ev, p, "sigma-hit", False
                return t_ev, p, "domain-exit", False
            if gs[j] < 0 and gs[j - 1] >= 0:
                if gs[j - 1] == 0.0:
                    if lo > t_arc0:
                        return lo, pts[j - 1], "sigma-hit", False
                    # left Sigma and came back inside the first sub-interval
                    lo = self._first_positive(st, g, lo, hi)
                    if lo is None:
                        return ts[0], pts[0], "sigma-hit", False
                t_ev, p = locate_event(st, g, lo, hi, tol=SIGMA_HIT_TOL)
                return t_ev, p, "sigma-hit", False
            # tangential touch: g has a small interior minimum
            if True:
                d_lo, d_hi = dg(*pts[j - 1]), dg(*pts[j])
                if d_lo < 0 < d_hi and min(gs[j - 1], gs[j]) < 1.0:
                    try:
                        t_m, p = locate_event(st, dg, lo, hi, tol=1e-6)
                    except ArithmeticError:
                        continue
                    if t_m - t_arc0 > 1e-7 and g(*p) <= TOUCH_TOL:
                        return t_m, p, "sigma-hit", True
        return None

    @staticmethod
    def _first_positive(st: DenseStep, g, lo: float, hi: float) -> Optional[float]:
        """A time in (lo, hi) where g > 0, searching ever closer to lo."""
        for _ in range(60):
            for k in range(1, 16):
                t = lo + (hi - lo) * k / 16
                if g(*st(t)) > 0:
                    return t
            hi = lo + (hi - lo) / 16
        return None

    def _slide_arc(self, cur: _Cursor, direction: int, start_event: Optional[Event]) -> TrajectoryArc:
        sys = self.sys
        level = self.level
        x0 = cur.point[0]
        h = 1e-7 * (1.0 + abs(x0))
        ref = sys.classify_point((x0 + direction * h, level))
        if ref.kind not in (Kind.SLIDING, Kind.ESCAPING):
            ref = sys.classify_point((x0, level))
        sx = -1.0 if ref.kind is Kind.SLIDING else 1.0
        sy = -sx
        gx = sys.lie_fn("X", 1)
        gy = sys.lie_fn("Y", 1)

        def rhs(s, _):
            return sys.sliding_speed(s), 0.0

        guards = (
            ("tangency-of-X", lambda s, _: sx * gx(s, level)),
            ("tangency-of-Y", lambda s, _: sy * gy(s, level)),
        )
        ctl = StepControl(self.opts.rtol, self.opts.atol, self.opts.max_step)
        t0 = cur.s
        s = x0
        arc = TrajectoryArc(Regime.S, [t0], [s], [level], start_event)
        t = t0
        while True:
            v = sys.sliding_speed(s)
            if abs(v) <= PSEUDO_EQ_TOL:
                ev = Event("sliding-boundary", t, (s, level), Regime.S, reason="pseudo-equilibrium")
                break
            if t >= self.T:
                ev = Event("horizon", t, (s, level), Regime.S)
                break
            try:
                st = step_smooth(rhs, t, (s, 0.0), ctl, h_limit=self.T - t, f0=(v, 0.0))
            except StepUnderflow as err:
                raise FlowError(str(err)) from err
            hit = None
            ts = [st.t0 + st.h * j / SUBSTEPS for j in range(SUBSTEPS + 1)]
            pts = [st.y0] + [st(tt) for tt in ts[1:-1]] + [st.y1]
            for j in range(1, SUBSTEPS + 1):
                if not sys.in_domain(pts[j][0], level):
                    xmin, xmax = sys.domain[:2]
                    t_ev, p = locate_event(st, lambda a, _: min(a - xmin, xmax - a), ts[j - 1], ts[j], tol=1e-8)
                    hit = (t_ev, p[0], "domain-exit", "")
                    break
                for reason, gfn in guards:
                    a, b = gfn(*pts[j - 1]), gfn(*pts[j])
                    if b <= 0 < a:
                        t_ev, p = locate_event(st, gfn, ts[j - 1], ts[j], tol=SIGMA_HIT_TOL)
                        hit = (t_ev, p[0], "sliding-boundary", reason)
                        break
                if hit:
                    break
            if hit is not None:
                t_ev, s_ev, kind, reason = hit
                if kind == "sliding-boundary":
                    s_ev, _ = self._snap(s_ev, level)
                ev = Event(kind, t_ev, (s_ev, level), Regime.S, reason=reason)
                if t_ev > st.t0:
                    arc.steps.append(_rescale(st, t_ev))
                if t_ev > arc.times[-1]:
                    arc.times.append(t_ev)
                    arc.xs.append(s_ev)
                    arc.ys.append(level)
                t, s = t_ev, s_ev
                break
            arc.steps.append(st)
            t, s = st.t1, st.y1[0]
            arc.times.append(t)
            arc.xs.append(s)
            arc.ys.append(level)
        arc.end_event = ev
        cur.s, cur.point = t, (s, level)
        return arc

    # -- driving -------------------------------------------------------------
    def start(self, p0) -> tuple[_Cursor, Optional[list[Continuation]]]:
        x, y = float(p0[0]), float(p0[1])
        if not self.sys.in_domain(x, y):
            raise ValueError(f"initial point {(x, y)} outside the domain {self.sys.domain}")
        cur = _Cursor(0.0, (x, y), [])
        fv = self.sys.fx(x, y)
        if abs(fv) <= SIGMA_HIT_TOL:
            cur.point = self._snap(*self._project(x, y))
            return cur, self._options(cur)
        return cur, [Continuation(Regime.X if fv > 0 else Regime.Y, "X" if fv > 0 else "Y")]

    def _options(self, cur: _Cursor) -> list[Continuation]:
        return continue_from(self.sys, cur.point)

    def apply(self, cur: _Cursor, opt: Continuation) -> Optional[list[Continuation]]:
        """Run ``opt`` and every forced continuation after it; return the next
        multi-way decision, or None once the branch is finished."""
        start_event = cur.arcs[-1].end_event if cur.arcs else None
        while True:
            if cur.s >= self.T and cur.arcs:
                cur.done = True
                return None
            if opt.regime is Regime.R:
                cur.arcs.append(self._rest_arc(cur, start_event))
                return None
            if opt.regime is Regime.S:
                arc = self._slide_arc(cur, opt.slide_dir, start_event)
            else:
                arc = self._smooth_arc(cur, opt.regime, start_event)
            cur.arcs.append(arc)
            ev = arc.end_event
            if ev.kind in ("horizon", "domain-exit"):
                cur.done = True
                return None
            if ev.kind == "equilibrium-stall":
                cur.arcs.append(self._rest_arc(cur, ev))
                return None
            self._record_event(cur, ev)
            if cur.done:
                return None
            if ev.kind == "sliding-boundary" and ev.reason == "pseudo-equilibrium":
                cur.arcs.append(self._rest_arc(cur, ev))
                return None
            opts = self._options(cur)
            start_event = ev
            if len(opts) > 1:
                return opts
            opt = opts[0]


def _rescale(st: DenseStep, t_end: float) -> DenseStep:
    """Same interpolant restricted to [t0, t_end] (coefficients re-expressed in the new step length)."""
    r = (t_end - st.t0) / st.h
    q = tuple(
        (c[0], c[1] * r, c[2] * r * r, c[3] * r * r * r) for c in st.q
    )
    return DenseStep(st.t0, t_end - st.t0, st.y0, st(t_end), q)


def _choose(policy: BranchPolicy, cur: _Cursor, opts: Sequence[Continuation]) -> Continuation:
    letters = [o.letter for o in opts]
    if isinstance(policy, Deterministic):
        if policy.prefer in letters:
            return opts[letters.index(policy.prefer)]
        return opts[0]
    if isinstance(policy, Scripted):
        if cur.scripted_pos < len(policy.choices):
            c = policy.choices[cur.scripted_pos]
            cur.scripted_pos += 1
            if c not in letters:
                raise ValueError(f"scripted choice {c!r} not admissible at {cur.point}; options {letters}")
            return opts[letters.index(c)]
        return opts[0]
    raise TypeError(f"unsupported policy {policy!r}")


def _finish(cur: _Cursor, direction: str) -> GlobalTrajectory:
    return GlobalTrajectory(cur.arcs, cur.branch, direction, cur.s, cur.truncated, cur.defaulted,
                            cur.diagnostics)


def integrate_global(sys: FilippovSystem, p0, T: float, policy: BranchPolicy = Deterministic("X"),
                     direction: str = "forward", opts: Optional[IntegrationOptions] = None) -> GlobalTrajectory:
    """One global trajectory from ``p0`` over ``[0, T]`` with decisions resolved by ``policy``."""
    if T <= 0:
        raise ValueError("horizon must be positive")
    if isinstance(policy, EnumerateAll):
        raise TypeError("use enumerate_branches for EnumerateAll")
    run_sys = _oriented(sys, direction)
    eng = _Engine(run_sys, T, opts or IntegrationOptions())
    cur, options = eng.start(p0)
    while options is not None:
        if len(options) > 1:
            choice = _choose(policy, cur, options)
            cur.branch += choice.letter
            cur.depth += 1
        else:
            choice = options[0]
        options = eng.apply(cur, choice)
    return _finish(cur, direction)


def enumerate_branches(sys: FilippovSystem, p0, T: float, max_branches: int = 64, max_depth: int = 16,
                       direction: str = "forward",
                       opts: Optional[IntegrationOptions] = None) -> list[GlobalTrajectory]:
    """Depth-first expansion of every non-forced decision, bounded by the branch and depth limits.

    Decisions beyond ``max_depth`` take the first admissible option (X, Y, S order)
    and are counted in ``defaulted_decisions``; the trajectory is flagged truncated.
    """
    if T <= 0:
        raise ValueError("horizon must be positive")
    if not (1 <= max_branches and 1 <= max_depth):
        raise ValueError("bounds must be >= 1")
    run_sys = _oriented(sys, direction)
    eng = _Engine(run_sys, T, opts or IntegrationOptions())
    results: list[GlobalTrajectory] = []
    hit_bound = False

    def run(cur: _Cursor, options):
        nonlocal hit_bound
        while options is not None and (len(options) == 1 or cur.depth >= max_depth):
            if len(options) > 1:
                cur.truncated = True
                cur.defaulted += 1
            options = eng.apply(cur, options[0])
        if options is None:
            results.append(_finish(cur, direction))
            return
        children = [cur.fork() for _ in options[1:]] + [cur]
        for opt, child in zip(options, children):
            if len(results) >= max_branches:
                hit_bound = True
                return
            child.branch += opt.letter
            child.depth += 1
            run(child, eng.apply(child, opt))

    cur, options = eng.start(p0)
    run(cur, options)
    if hit_bound:
        for r in results:
            r.truncated = True
    results.sort(key=lambda r: [ORDER.index(c) for c in r.branch_id])
    return results


def _oriented(sys: FilippovSystem, direction: str) -> FilippovSystem:
    if direction == "forward":
        return sys
    if direction == "backward":
        return _reversed(sys)
    raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")


_REVERSED: dict[int, tuple[FilippovSystem, FilippovSystem]] = {}


def _reversed(sys: FilippovSystem) -> FilippovSystem:
    key = id(sys)
    hit = _REVERSED.get(key)
    if hit is None or hit[0] is not sys:
        hit = _REVERSED[key] = (sys, sys.negated())
    return hit[1]
