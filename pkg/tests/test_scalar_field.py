import numpy as np
import pytest

from lipkit import (Constant, Coordinate, DistanceTo, DomainError, InputError,
                    Interval, MetricSpace, PreconditionError, Series,
                    Tabulated, Transported, global_lip, maximum, minimum,
                    pointwise_lip, scaled_oscillation)
from lipkit.fixtures import cusp_curve, sin_reciprocal_pairs

from helpers import make_space


def grid():
    return MetricSpace.from_grid(0.0, 2.0, 0.5)


def test_constant_evaluates():
    f = Constant(grid(), 3.0)
    assert all(f(p) == 3.0 for p in range(5))


def test_distance_to_set_field():
    f = DistanceTo(grid(), [0])
    assert f(4) == 2.0
    np.testing.assert_allclose(f.values(), [0.0, 0.5, 1.0, 1.5, 2.0])


def test_reciprocal_at_zero_is_domain_error():
    f = Transported("reciprocal", DistanceTo(grid(), [0]))
    with pytest.raises(DomainError):
        f(0)


def test_global_lip_identity_is_one():
    space = grid()
    est = global_lip(Coordinate(space))
    assert est.finite
    assert est.value == 1.0


def test_global_lip_constant_is_zero():
    assert global_lip(Constant(grid(), 4.0)).value == 0.0


def test_global_lip_sin_reciprocal_pairs_exceeds_100():
    # crest-trough pairs: |f(s_n) - f(t_n)| = 2 while the gaps shrink
    space, f, pairs = sin_reciprocal_pairs(20)
    est = global_lip(f)
    assert est.value > 100.0
    v = f.values()
    for i, j in pairs:
        assert abs(v[i] - v[j]) > 1.99


def test_pointwise_lip_constant_zero():
    space = grid()
    for p in range(space.n):
        assert pointwise_lip(Constant(space, 1.0), p).value == 0.0


def test_pointwise_lip_cusp_same_sign_bounded():
    space, f, pairs = cusp_curve()
    # p = u_1 (the largest positive-branch sample); same-sign slopes stay <= 1
    pos = np.arange(0, space.n, 2)
    p = int(pos[-1])
    v = f.values()
    D = space.pairwise()
    ratios = [abs(v[x] - v[p]) / D[x, p] for x in pos if x != p]
    assert max(ratios) <= 1.0 + 1e-12


def test_pointwise_lip_absolute_value_at_origin():
    space = MetricSpace.from_grid(-1.0, 1.0, 0.25)
    f = Tabulated(space, np.abs(space.coords[:, 0]))
    origin = int(np.flatnonzero(space.coords[:, 0] == 0.0)[0])
    assert pointwise_lip(f, origin).value == 1.0


def test_scaled_oscillation_isolated_point_is_zero():
    space = MetricSpace.from_points([0.0, 5.0, 10.0])
    f = Tabulated(space, [1.0, 2.0, 3.0])
    assert scaled_oscillation(f, 0, [1.0]) == 0.0


def test_scaled_oscillation_constant_zero():
    space = grid()
    assert scaled_oscillation(Constant(space, 2.0), 2, [1.0, 0.5]) == 0.0


def test_scaled_oscillation_absolute_value():
    # open balls on the step-0.01 grid: radii 1, 0.5, 0.25 give
    # 0.99, 0.98, 0.96; the min is the last
    space = MetricSpace.from_grid(-1.0, 1.0, 0.01)
    f = Tabulated(space, np.abs(space.coords[:, 0]))
    origin = int(np.argmin(np.abs(space.coords[:, 0])))
    osc = scaled_oscillation(f, origin, [1.0, 0.5, 0.25])
    assert abs(osc - 0.96) < 1e-9


def test_scaled_oscillation_below_pointwise_lip():
    rng = np.random.default_rng(3)
    for _ in range(10):
        space = make_space(rng, n_max=15)
        f = Tabulated(space, rng.normal(size=space.n))
        p = int(rng.integers(space.n))
        radii = rng.uniform(0.1, space.diameter() + 1.0, size=3)
        assert (scaled_oscillation(f, p, radii)
                <= pointwise_lip(f, p).value + 1e-12)


def test_global_lip_is_max_of_pointwise():
    rng = np.random.default_rng(5)
    for _ in range(10):
        space = make_space(rng, n_max=12)
        f = Tabulated(space, rng.normal(size=space.n))
        pw = max(pointwise_lip(f, p).value for p in range(space.n))
        assert abs(global_lip(f).value - pw) < 1e-12


def test_global_lip_subadditive_under_combination():
    rng = np.random.default_rng(9)
    space = make_space(rng, n_max=12)
    f = Tabulated(space, rng.normal(size=space.n))
    g = Tabulated(space, rng.normal(size=space.n))
    a, b = 1.5, -2.0
    combo = Constant(space, a) * f + Constant(space, b) * g
    bound = abs(a) * global_lip(f).value + abs(b) * global_lip(g).value
    assert global_lip(combo).value <= bound + 1e-9


def test_cusp_opposite_pair_ratio_is_reciprocal():
    # f(u_t) - f(u_{-t}) = 2 t^2 over distance 2 t^3: ratio 1/t
    ts = np.geomspace(0.05, 1.0, 12)
    space, f, pairs = cusp_curve(ts)
    v = f.values()
    D = space.pairwise()
    for t, (i, j) in zip(ts, pairs):
        assert abs(v[i] - v[j]) / D[i, j] == pytest.approx(1.0 / t, rel=1e-12)


def test_field_algebra_and_clamp():
    space = grid()
    t = Coordinate(space)
    h = (t + Constant(space, 1.0)) * Constant(space, 2.0) - t
    np.testing.assert_allclose(h.values(), space.coords[:, 0] + 2.0)
    clamped = t.clamp(Interval.closed(0.5, 1.5))
    np.testing.assert_allclose(clamped.values(), [0.5, 0.5, 1.0, 1.5, 1.5])
    np.testing.assert_allclose(minimum(t, 1.0).values(), [0, 0.5, 1, 1, 1])
    np.testing.assert_allclose(maximum(t, 1.0).values(), [1, 1, 1, 1.5, 2])


def test_tabulated_length_checked():
    with pytest.raises(InputError):
        Tabulated(grid(), [1.0, 2.0])


def test_transport_round_trip():
    space = grid()
    t = Coordinate(space)
    back = Transported("tan", Transported("arctan", t))
    np.testing.assert_allclose(back.values(), t.values(), atol=1e-14)


def test_series_activity_contract():
    space = grid()
    terms = [DistanceTo(space, [0]), DistanceTo(space, [4])]
    full = Series(space, terms)
    np.testing.assert_allclose(full.values(),
                               terms[0].values() + terms[1].values())
    # activity lists that hide a nonzero term are a contract violation
    fake = Series(space, terms, activity=[[0]] * space.n)
    assert fake.check_activity() > 0.0


def test_interval_parse_and_containment():
    box = Interval.parse("0,1,closed,open")
    assert box.contains(0.0) and not box.contains(1.0)
    assert box.interior_contains(0.5) and not box.interior_contains(0.0)
    ray = Interval.parse("0,inf,open,open")
    assert ray.bounded_below and not ray.bounded_above
    assert not ray.contains(0.0) and ray.contains(10.0)
    line = Interval.real_line()
    assert line.is_real_line and line.contains(-1e9)
    assert Interval.closed(2.0, 2.0).is_degenerate


def test_interval_parse_rejects_garbage():
    with pytest.raises(InputError):
        Interval.parse("0..1")
    with pytest.raises(InputError):
        Interval.parse("0,1,open,sideways")
    # reversed endpoints survive parsing but are flagged degenerate
    assert Interval.parse("1,0,closed,closed").is_degenerate
