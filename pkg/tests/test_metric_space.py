import numpy as np
import pytest

from lipkit import (InputError, MetricSpace, PreconditionError, Subset,
                    validate_metric)

from helpers import make_space


def test_uniform_three_point_matrix_is_valid():
    space = MetricSpace.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    report = space.validate()
    assert report.ok
    assert report.violations == []


def test_triangle_violation_reports_witness_triple():
    D = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    report = validate_metric(MetricSpace.from_matrix(D, validate=False))
    assert not report.ok
    kinds = {v.kind for v in report.violations}
    assert "triangle" in kinds
    triangles = [v for v in report.violations if v.kind == "triangle"]
    assert any(tuple(v.ids) == (0, 1, 2) for v in triangles)


def test_asymmetry_detected():
    D = np.array([[0.0, 1.0], [2.0, 0.0]])
    report = validate_metric(MetricSpace.from_matrix(D, validate=False))
    assert not report.ok
    assert any(v.kind == "symmetry" for v in report.violations)


def test_from_matrix_rejects_nonsquare():
    with pytest.raises(InputError):
        MetricSpace.from_matrix(np.zeros((2, 3)))


def test_grid_distance_is_absolute_difference():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    assert space.n == 5
    assert space.dist(0, 3) == 1.5


def test_euclidean_distance():
    space = MetricSpace.from_points([[0.0, 0.0], [3.0, 4.0]])
    assert space.dist(0, 1) == 5.0


def test_graph_shortest_path():
    space = MetricSpace.from_graph(3, [(0, 1, 2.0), (1, 2, 3.0)])
    assert space.dist(0, 2) == 5.0
    assert space.validate().ok


def test_grid_rejects_bad_ranges():
    with pytest.raises(InputError):
        MetricSpace.from_grid(1.0, 0.0, 0.5)
    with pytest.raises(InputError):
        MetricSpace.from_grid(0.0, 1.0, -0.5)


def test_dist_to_set_nearest_member():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    # p = 1.5, S = coordinates {0, 1}
    assert space.dist_to_set(3, [0, 2]) == 0.5


def test_dist_to_set_zero_on_members():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    assert space.dist_to_set(2, [0, 2]) == 0.0


def test_dist_to_set_graph_backend():
    space = MetricSpace.from_graph(3, [(0, 1, 2.0), (1, 2, 3.0)])
    assert space.dist_to_set(0, [2]) == 5.0


def test_dist_to_set_empty_rejected():
    space = MetricSpace.from_grid(0.0, 1.0, 0.5)
    with pytest.raises(PreconditionError):
        space.dist_to_set(0, [])


def test_open_ball_is_strict():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    ids = space.ball(0, 1.0)
    assert set(ids.tolist()) == {0, 1}


def test_diameter_and_min_positive_distance():
    space = MetricSpace.from_points([0.0, 0.25, 1.0])
    assert space.diameter() == 1.0
    assert space.min_positive_distance() == 0.25


def test_subset_sorts_and_deduplicates():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    A = Subset(space, [4, 0, 4, 2])
    assert A.members.tolist() == [0, 2, 4]
    assert len(A) == 3
    assert 2 in A and 1 not in A
    assert A.complement().tolist() == [1, 3]


def test_subset_rejects_out_of_range_ids():
    space = MetricSpace.from_grid(0.0, 1.0, 0.5)
    with pytest.raises(InputError):
        Subset(space, [0, 7])


def test_subset_whole_and_nonempty_guard():
    space = MetricSpace.from_grid(0.0, 1.0, 0.5)
    assert len(Subset.whole(space)) == space.n
    with pytest.raises(PreconditionError):
        Subset(space, []).require_nonempty()


def test_random_backends_validate():
    # triangle inequality on all sampled triples, every backend
    rng = np.random.default_rng(7)
    for _ in range(12):
        space = make_space(rng, n_max=20)
        report = space.validate()
        assert report.ok, space.backend
        D = space.pairwise()
        worst = (D[:, None, :] - D[:, :, None] - D[None, :, :]).max()
        assert worst <= 1e-9


def test_dist_row_matches_pairwise():
    rng = np.random.default_rng(11)
    space = make_space(rng, n_max=15)
    D = space.pairwise()
    for p in range(space.n):
        np.testing.assert_allclose(space.dist_row(p), D[p], atol=1e-12)
