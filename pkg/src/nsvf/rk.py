"""Dormand-Prince 5(4) steps with a 4th-order continuous extension, for planar ODEs.

Plain floats instead of arrays: the state is two numbers and numpy call
overhead would dominate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.optimize import brentq

Vec = tuple[float, float]
Rhs = Callable[[float, float], Vec]

C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# 5th-order weights minus the embedded 4th-order weights
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension: y(t0 + th*h) = y0 + h * sum_i K_i * sum_j P[i][j] th^(j+1)
P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
H_MIN = 1e-14


class StepUnderflow(ArithmeticError):
    pass


@dataclass(frozen=True)
class DenseStep:
    """One accepted step and its interpolant."""

    t0: float
    h: float
    y0: Vec
    y1: Vec
    q: tuple[tuple[float, float, float, float], tuple[float, float, float, float]]

    @property
    def t1(self) -> float:
        return self.t0 + self.h

    def __call__(self, t: float) -> Vec:
        th = (t - self.t0) / self.h
        out = []
        for comp in range(2):
            c1, c2, c3, c4 = self.q[comp]
            out.append(self.y0[comp] + self.h * th * (c1 + th * (c2 + th * (c3 + th * c4))))
        return out[0], out[1]


@dataclass
class StepControl:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = 0.1
    h: Optional[float] = None  # proposal for the next step


def _stages(rhs: Rhs, t: float, y: Vec, h: float, k0: Vec):
    ks = [k0]
    for i in range(1, 7):
        a = A[i]
        yi0 = y[0] + h * sum(a[j] * ks[j][0] for j in range(i))
        yi1 = y[1] + h * sum(a[j] * ks[j][1] for j in range(i))
        ks.append(rhs(yi0, yi1))
    return ks


def initial_step(rhs: Rhs, y: Vec, f0: Vec, ctl: StepControl) -> float:
    """First trial step: move about 1% of the state's magnitude (at least 1% of a unit)."""
    speed = max(abs(f0[0]), abs(f0[1]))
    size = 1.0 + max(abs(y[0]), abs(y[1]))
    if speed == 0.0:
        return ctl.max_step
    return min(ctl.max_step, 0.01 * size / speed)


def step_smooth(rhs: Rhs, t: float, y: Vec, ctl: StepControl, h_limit: float = math.inf,
                f0: Optional[Vec] = None) -> DenseStep:
    """Take one accepted adaptive step from ``(t, y)``; updates ``ctl.h`` for the next one.

    Componentwise local error is kept below ``atol + rtol * |y|``.
    """
    if f0 is None:
        f0 = rhs(*y)
    h = ctl.h if ctl.h is not None else initial_step(rhs, y, f0, ctl)
    h = min(h, ctl.max_step, h_limit)
    while True:
        if h < H_MIN and h < h_limit:
            raise StepUnderflow(f"step size underflow (h = {h:.3e}) at t = {t:.6g}, state {y}")
        ks = _stages(rhs, t, y, h, f0)
        y1 = tuple(y[c] + h * sum(B[i] * ks[i][c] for i in range(7)) for c in range(2))
        err = 0.0
        for c in range(2):
            e = h * sum(E[i] * ks[i][c] for i in range(7))
            sc = ctl.atol + ctl.rtol * max(abs(y[c]), abs(y1[c]))
            err = max(err, abs(e) / sc)
        if err <= 1.0:
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
            ctl.h = min(h * factor, ctl.max_step)
            q = tuple(
                tuple(sum(ks[i][c] * P[i][j] for i in range(7)) for j in range(4)) for c in range(2)
            )
            return DenseStep(t, h, (float(y[0]), float(y[1])), (float(y1[0]), float(y1[1])), q)
        h *= max(MIN_FACTOR, SAFETY * err ** -0.2)


class EventNotBracketed(ValueError):
    pass


def locate_event(dense: DenseStep, guard: Callable[[float, float], float], t_lo: Optional[float] = None,
                 t_hi: Optional[float] = None, tol: float = 1e-10) -> tuple[float, Vec]:
    """Root of ``guard`` along the step interpolant between ``t_lo`` and ``t_hi``.

    The guard must change sign on the bracket.
    """
    lo = dense.t0 if t_lo is None else t_lo
    hi = dense.t1 if t_hi is None else t_hi

    def g(t):
        return guard(*dense(t))

    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo, dense(lo)
    if ghi == 0.0:
        return hi, dense(hi)
    if (glo < 0) == (ghi < 0):
        raise EventNotBracketed("guard has no sign change on the step")
    t_star, info = brentq(g, lo, hi, xtol=4 * 2.2e-16 * max(1.0, abs(hi)), rtol=8.9e-16, maxiter=100,
                          full_output=True, disp=False)
    if not info.converged:
        raise ArithmeticError("event refinement did not converge in 100 iterations")
    p = dense(t_star)
    if abs(guard(*p)) > tol:
        # brentq stops on bracket width; accept only if the guard is small
        raise ArithmeticError(f"event refinement left |guard| = {abs(guard(*p)):.2e} > {tol:.0e}")
    return t_star, p
