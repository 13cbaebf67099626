import math
import random

import pytest

from nsvf import expr as ex
from nsvf.filippov import (
    FilippovSystem, Kind, PlanarField, SlidingUndefined, SystemError_, Visibility, sliding_geometric,
)
from nsvf.systems import builtin, parse_system
from helpers import random_system

R2 = math.sqrt(2) / 2


@pytest.fixture(scope="module")
def ex1():
    return builtin("paper-ex1")


def test_lie_derivatives(ex1):
    assert ex1.lie_derivative("X", 1) == ex.fold(ex.parse("-2*x"))
    assert ex1.lie_derivative("X", 2) == ex.Const(-2.0)
    assert ex1.lie_derivative("Y", 1) == ex1.Y.second
    with pytest.raises(ValueError):
        ex1.lie_derivative("X", 0)
    with pytest.raises(ValueError):
        ex1.lie_derivative("X", 7)


def test_contact_orders(ex1):
    c = ex1.contact_order("X", (0, 0))
    assert (c.order, c.leading, c.visibility) == (2, -2.0, Visibility.INVISIBLE)
    c = ex1.contact_order("Y", (0, 0))
    assert (c.order, c.visibility) == (2, Visibility.VISIBLE)
    for s in (R2, -R2):
        c = ex1.contact_order("Y", (s, 0))
        assert (c.order, c.visibility) == (2, Visibility.INVISIBLE)
        assert c.leading == pytest.approx(8.0, rel=1e-12)
    c = ex1.contact_order("X", (0.3, 0))
    assert (c.order, c.visibility) == (1, Visibility.TRANSVERSAL)


def test_odd_and_degenerate_contacts():
    s = FilippovSystem(PlanarField.parse("1", "x^2"), PlanarField.parse("1", "0"), ex.parse("y"))
    assert s.contact_order("X", (0, 0)).visibility is Visibility.ODD
    assert s.contact_order("X", (0, 0)).order == 3
    d = s.contact_order("Y", (0, 0))
    assert d.order is None and d.degenerate


def test_classify_examples(ex1):
    assert ex1.classify_point((0.5, 0)).kind is Kind.SLIDING
    assert ex1.classify_point((-0.5, 0)).kind is Kind.ESCAPING
    assert ex1.classify_point((0.9, 0)).kind is Kind.SEWING
    p = ex1.classify_point((0, 0))
    assert p.kind is Kind.TANGENCY and not p.singular
    q = builtin("ssing-demo").classify_point((0, 0))
    assert q.kind is Kind.TANGENCY and q.singular


def test_off_sigma_rejected(ex1):
    with pytest.raises(ValueError, match="not on Sigma"):
        ex1.classify_point((0.5, 0.1))


def test_sliding_eval(ex1):
    v = ex1.sliding_eval((0.5, 0))
    assert v[0] == pytest.approx(-1.0, abs=1e-15)
    assert v[1] == 0.0
    for x in (0.1, 0.3, 0.6):
        assert ex1.sliding_eval((x, 0))[1] == 0.0
        assert ex1.sliding_eval((x, 0))[0] == pytest.approx(-(1 + 2 * x * x) / (2 * (1 - x * x)), rel=1e-13)


def test_antisymmetric_pseudo_equilibrium():
    s = FilippovSystem(PlanarField.parse("0", "-1"), PlanarField.parse("0", "1"), ex.parse("y"))
    assert s.sliding_eval((0, 0)) == (0.0, 0.0)
    assert s.classify_point((0, 0)).pseudo_equilibrium


def test_sliding_undefined():
    s = FilippovSystem(PlanarField.parse("1", "-1"), PlanarField.parse("1", "-1"), ex.parse("y"))
    with pytest.raises(SlidingUndefined):
        s.sliding_eval((0, 0))


def test_segmentation(ex1):
    seg = ex1.segment_sigma(-1, 1, 400)
    assert seg.kinds() == [Kind.SEWING, Kind.ESCAPING, Kind.SLIDING, Kind.SEWING]
    cuts = [iv.b for iv in seg.intervals[:-1]]
    for got, want in zip(cuts, (-R2, 0.0, R2)):
        assert abs(got - want) <= 1e-9
    assert ex1.segment_sigma(0.1, 0.6, 50).kinds() == [Kind.SLIDING]
    same = builtin("crossing-cycle").segment_sigma(0.2, 2.0, 100)
    assert same.kinds() == [Kind.SEWING]


def test_printed_variant_differs():
    # the uncorrected Y makes (0, sqrt(2)/2) sewing, contradicting the described layout
    seg = builtin("paper-ex1-printed").segment_sigma(-1, 1, 400)
    assert seg.kinds() == [Kind.ESCAPING, Kind.SEWING, Kind.SLIDING]
    assert builtin("paper-ex1-printed").classify_point((0.3, 0)).kind is Kind.SEWING


def test_sign_table_random_systems():
    rng = random.Random(5)
    checked = 0
    while checked < 1000:
        s = random_system(rng)
        for _ in range(50):
            x = rng.uniform(-2, 2)
            lx = s.lie_fn("X", 1)(x, 0.0)
            ly = s.lie_fn("Y", 1)(x, 0.0)
            c = s.classify_point((x, 0.0))
            if s.is_tangency("X", x, 0.0) or s.is_tangency("Y", x, 0.0):
                assert c.kind is Kind.TANGENCY
            elif lx * ly > 0:
                assert c.kind is Kind.SEWING
            elif lx < 0 < ly:
                assert c.kind is Kind.SLIDING
            else:
                assert c.kind is Kind.ESCAPING
            assert (c.lie_x, c.lie_y) == (lx, ly)
            checked += 1


def geometric_agreement(n=100, seed=17):
    """Worst mismatch between the closed-form sliding field and the segment construction."""
    rng = random.Random(seed)
    worst, done = 0.0, 0
    while done < n:
        s = random_system(rng)
        x = rng.uniform(-2, 2)
        c = s.classify_point((x, 0.0))
        if c.kind is not Kind.SLIDING:
            continue
        a = s.sliding_eval((x, 0.0))
        g = sliding_geometric(s, (x, 0.0))
        scale = 1.0 + math.hypot(*a)
        worst = max(worst, math.hypot(a[0] - g[0], a[1] - g[1]) / scale)
        done += 1
    return worst


def test_formula_matches_geometry():
    assert geometric_agreement() <= 1e-9


def test_tangent_to_sigma():
    rng = random.Random(23)
    for _ in range(200):
        s = random_system(rng)
        x = rng.uniform(-2, 2)
        c = s.classify_point((x, 0.0))
        if c.kind not in (Kind.SLIDING, Kind.ESCAPING):
            continue
        z = s.sliding_eval((x, 0.0))
        assert abs(z[1]) <= 1e-9 * (1 + math.hypot(*z))


@pytest.mark.parametrize("c", [0.01, 3.0, 250.0])
def test_contact_scaling(ex1, c):
    scaled = FilippovSystem(ex1.X.scaled(c), ex1.Y.scaled(c), ex1.f, ex1.domain)
    for which, p in (("X", (0, 0)), ("Y", (0, 0)), ("Y", (R2, 0)), ("X", (0.3, 0))):
        a, b = ex1.contact_order(which, p), scaled.contact_order(which, p)
        assert (a.order, a.visibility) == (b.order, b.visibility)
        assert b.leading == pytest.approx(a.leading * c ** a.order, rel=1e-9)


def test_reversal_swaps_sliding_and_escaping(ex1):
    rev = ex1.negated()
    for x in [i / 50 - 1 for i in range(101)]:
        a, b = ex1.classify_point((x, 0)).kind, rev.classify_point((x, 0)).kind
        swap = {Kind.SLIDING: Kind.ESCAPING, Kind.ESCAPING: Kind.SLIDING}
        assert b is swap.get(a, a)


def test_system_file_parsing(tmp_path):
    text = """# paper example
X = (1, -2*x)
Y = (-2, 2*x - 4*x^3)   # corrected sign
f = y
domain = -3 3 -3 3
"""
    s = parse_system(text)
    assert s.domain == (-3.0, 3.0, -3.0, 3.0)
    assert s.classify_point((0.5, 0)).kind is Kind.SLIDING
    with pytest.raises(SystemError_, match="line 2"):
        parse_system("X = (1, -2*x)\nY = (1 +, 2)\nf = y")
    with pytest.raises(SystemError_, match="missing"):
        parse_system("X = (1, 2)\nf = y")
    with pytest.raises(SystemError_, match="unknown key"):
        parse_system("X = (1, 2)\nY = (1, 2)\nf = y\nZ = 3")


def test_general_f_pointwise():
    s = FilippovSystem(PlanarField.parse("1", "0"), PlanarField.parse("-1", "0"), ex.parse("x^2 + y^2 - 1"))
    assert s.sigma_level is None
    assert s.classify_point((1, 0)).kind is Kind.ESCAPING
    with pytest.raises(SystemError_):
        s.segment_sigma(-1, 1)
