"""Acceptance criteria, one test each; every test prints a PASS/FAIL line with the measured values."""
import math
import time

import pytest
from scipy.integrate import quad

from helpers import CLI_ACCEPTANCE_COMMANDS, run_cli
from nsvf.filippov import Kind, Visibility
from nsvf.flow import Deterministic, continue_from, enumerate_branches, integrate_global
from nsvf.limits import REGIONS, check_invariance, classify_omega, crossing_sequence, minimality_evidence, \
    non_dense_witness
from nsvf.systems import builtin
from test_expr import derivative_agreement
from test_filippov import geometric_agreement
from test_flow import _all_trajectories

R2 = math.sqrt(2) / 2


@pytest.fixture
def report(capsys):
    """Call with (criterion number, passed, detail); prints the verdict line outside capture."""
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def ex1():
    return builtin("paper-ex1")


def test_criterion_01_segmentation(ex1, report):
    t0 = time.perf_counter()
    seg = ex1.segment_sigma(-1, 1)
    dt = time.perf_counter() - t0
    kinds = [k.value for k in seg.kinds()]
    xs = [b.point[0] for b in seg.boundaries]
    err = max(abs(a - b) for a, b in zip(xs, (-R2, 0.0, R2))) if len(xs) == 3 else math.inf
    ok = kinds == ["sewing", "escaping", "sliding", "sewing"] and err <= 1e-9 and dt < 1.0
    report(1, ok, f"kinds={kinds} boundary error={err:.2e} (tol 1e-9) runtime={dt:.3f}s (< 1s)")


def test_criterion_02_tangencies(ex1, report):
    p = ex1.classify_point((0.0, 0.0))
    got = [(p.x_contact.order, p.x_contact.visibility), (p.y_contact.order, p.y_contact.visibility)]
    want = [(2, Visibility.INVISIBLE), (2, Visibility.VISIBLE)]
    for s in (-1, 1):
        q = ex1.classify_point((s * R2, 0.0))
        got.append((q.y_contact.order, q.y_contact.visibility))
        want.append((2, Visibility.INVISIBLE))
    ok = got == want and p.kind is Kind.TANGENCY
    report(2, ok, "p: X " + ", Y ".join(f"order {o} {v.value}" for o, v in got[:2]) +
           "; p-, p+: Y " + ", ".join(f"order {o} {v.value}" for o, v in got[2:]))


def test_criterion_03_sliding_time(ex1, report):
    oracle, _ = quad(lambda x: 2 * (1 - x * x) / (1 + 2 * x * x), 0.0, 0.5, epsabs=1e-12, epsrel=1e-12)
    t0 = time.perf_counter()
    arc = integrate_global(ex1, (0.5, 0.0), 2.0, Deterministic("S")).arcs[0]
    dt = time.perf_counter() - t0
    err = abs(arc.duration - oracle)
    ok = arc.end_event.kind == "sliding-boundary" and abs(arc.end[0]) <= 1e-9 and err <= 1e-6 and dt < 1.0
    report(3, ok, f"T*={arc.duration:.12f} oracle={oracle:.12f} |diff|={err:.2e} (tol 1e-6) runtime={dt:.3f}s")


def test_criterion_04_boundary_loop(ex1, report):
    t0 = time.perf_counter()
    tr = integrate_global(ex1, (-1.0, 0.0), 3.5, Deterministic("Y"))
    dt = time.perf_counter() - t0
    back = [r for r in crossing_sequence(tr) if r.time > 1e-6 and abs(r.abscissa + 1) < 1e-3]
    period = back[0].time if back else math.nan
    closure = math.hypot(back[0].point[0] + 1, back[0].point[1]) if back else math.inf
    ok = abs(period - 3.0) <= 1e-6 and closure <= 1e-6 and dt < 1.0
    report(4, ok, f"period={period:.9f} (3 +- 1e-6) closure={closure:.2e} (<= 1e-6) runtime={dt:.3f}s")


def test_criterion_05_three_continuations(ex1, report):
    br = enumerate_branches(ex1, (0.0, 0.0), 5.0, max_depth=1)
    ids = [b.branch_id for b in br]
    letters = [c.letter for c in continue_from(ex1, (0.0, 0.0))]
    detail = f"branch ids={ids} (expected ['X', 'Y', 'S'])"
    if ids != ["X", "Y", "S"]:
        # X is invisible at p and its orbit y = -x^2 lies in y < 0, so the admissibility rules
        # offer only Y and S; admitting X would also break Lambda's invariance (criterion 6)
        detail += f"; admissible continuations at p are {letters}: X is an invisible fold there"
    report(5, ids == ["X", "Y", "S"], detail)


def test_criterion_06_minimality(ex1, report):
    t0 = time.perf_counter()
    ev = minimality_evidence(ex1, REGIONS["Lambda"], 25, 30.0)
    dt = time.perf_counter() - t0
    checks = {k: v["pass"] for k, v in ev["checks"].items()}
    ok = ev["verdict"] == "pass" and all(checks.values()) and dt < 30.0
    report(6, ok, f"verdict={ev['verdict']} checks={checks} runtime={dt:.1f}s (< 30s)")


def test_criterion_07_boundary_not_invariant(ex1, report):
    res = check_invariance(ex1, REGIONS["Lambda-boundary"], 25, 30.0)
    w = res.witness or {}
    at_p = bool(w) and w["sample"] == [0.0, 0.0]
    ok = res.verdict == "violated" and at_p and bool(w.get("branch"))
    report(7, ok, f"verdict={res.verdict} witness branch={w.get('branch')!r} from sample {w.get('sample')} "
                  f"exit at {w.get('exit_point')} regime {w.get('regime')}")


def test_criterion_08_omega_kinds(report):
    out, ok = [], True
    t0 = time.perf_counter()
    r = classify_omega(builtin("crossing-cycle"), (0.1, 0.1), 60.0)
    dt = time.perf_counter() - t0
    good = r.kind == "pseudo-cycle" and abs(r.support["period"] - 2 * math.pi) <= 1e-4 and dt < 10
    ok &= good
    out.append(f"crossing-cycle {r.kind} period={r.support.get('period', math.nan):.8f} ({dt:.2f}s)")

    s = builtin("ssing-demo")
    t0 = time.perf_counter()
    r = classify_omega(s, (0.5, 0.0), 100.0)
    dt = time.perf_counter() - t0
    mags = [abs(c.abscissa) for c in crossing_sequence(integrate_global(s, (0.5, 0.0), 100.0))]
    decreasing = all(b < a for a, b in zip(mags, mags[1:]))
    good = r.kind == "singular-tangency" and math.hypot(*r.support["point"]) <= 1e-9 and decreasing and dt < 10
    ok &= good
    out.append(f"ssing-demo {r.kind} at {r.support.get('point')} over {len(mags)} strictly decreasing "
               f"crossings={decreasing} ({dt:.2f}s)")

    t0 = time.perf_counter()
    r = classify_omega(builtin("smooth-sink"), (1.0, 1.0), 50.0)
    dt = time.perf_counter() - t0
    ok &= r.kind == "equilibrium" and dt < 10
    out.append(f"smooth-sink {r.kind} ({dt:.2f}s)")
    report(8, ok, "; ".join(out))


def test_criterion_09_non_dense(ex1, report):
    gamma, w = non_dense_witness(ex1, REGIONS["Lambda"], (0.5, 0.2), 30.0)
    ok = w.found and w.radius >= 0.05
    report(9, ok, f"uncovered disk centre={w.center} radius={w.radius:.4f} (>= 0.05), {len(gamma)} trajectory points")


def test_criterion_10_properties(report, tmp_path):
    d_err = derivative_agreement()
    g_err = geometric_agreement(100)
    worst = 0.0
    for name, tr in _all_trajectories():
        s = builtin(name)
        for arc in tr.arcs:
            for _, x, y in arc.dense_points(8):
                f = s.fx(x, y)
                worst = max(worst, {"X": -f, "Y": f, "S": abs(f), "R": 0.0}[arc.regime.value])
    identical = []
    for args in CLI_ACCEPTANCE_COMMANDS:
        (tmp_path / args[0]).mkdir()
        (tmp_path / (args[0] + "-2")).mkdir()
        a = run_cli(args, tmp_path / args[0])
        b = run_cli(args, tmp_path / (args[0] + "-2"))
        identical.append(a[0] == 0 and a == b)
    ok = d_err <= 1e-5 and g_err <= 1e-9 and worst <= 1e-8 and all(identical)
    report(10, ok, f"derivative mismatch={d_err:.2e} (1e-5) sliding-field mismatch={g_err:.2e} (1e-9) "
                   f"regime-side violation={worst:.2e} (1e-8) CLI reruns identical={sum(identical)}/{len(identical)}")
