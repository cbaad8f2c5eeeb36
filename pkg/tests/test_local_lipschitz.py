import numpy as np
import pytest

from lipkit import (Constant, Interval, LocalWitness, MetricSpace,
                    PreconditionError, Subset, Tabulated, certify_local_witness,
                    check_k_lipschitz, decompose, generate_local_witness,
                    global_lip, increasing_cover, local_extend, modulus_witness,
                    witness_from_modulus)
from lipkit.fixtures import (cusp_curve, reciprocal_on_ray,
                             sin_reciprocal_on_interval, square_on_grid)

TOL = 1e-9


def restriction_slope(space, f, ids):
    """Exhaustive pair slope of f over the given sample ids."""
    v = f.values()[ids]
    D = space.pairwise()[np.ix_(ids, ids)]
    iu = np.triu_indices(len(ids), 1)
    return float((np.abs(v[:, None] - v[None, :])[iu] / D[iu]).max())


def test_increasing_cover_square_example():
    space, f, witness = square_on_grid()
    cover = increasing_cover(f, witness, bound=9.0)
    top = int(cover.thresholds.max())
    assert top == 10
    whole = cover.set_at(10)
    assert whole.all()
    slope = restriction_slope(space, f, np.flatnonzero(whole))
    assert slope == pytest.approx(5.9, rel=1e-9)
    assert slope <= 10.0
    worst, _ = cover.soundness_check()
    assert worst <= TOL


def test_increasing_cover_levels_nested_and_sound():
    space, f, witness = sin_reciprocal_on_interval()
    cover = increasing_cover(f, witness)
    prev = np.zeros(space.n, dtype=bool)
    for t in cover.thresholds:
        cur = cover.set_at(int(t))
        assert (prev <= cur).all()
        ids = np.flatnonzero(cur)
        if ids.size > 1:
            assert restriction_slope(space, f, ids) <= float(t) + TOL
        prev = cur
    assert prev.all()
    worst, _ = cover.soundness_check()
    assert worst <= TOL


def test_increasing_cover_constant_field():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    f = Constant(space, 3.0)
    witness = LocalWitness.from_triples([(p, 10.0, 0.0) for p in range(space.n)])
    cover = increasing_cover(f, witness)
    assert cover.set_at(1).all()
    worst, _ = cover.soundness_check()
    assert worst <= TOL


def test_increasing_cover_rejects_small_bound():
    space, f, witness = square_on_grid()
    with pytest.raises(PreconditionError) as err:
        increasing_cover(f, witness, bound=5.0)
    i, j = err.value.witness
    v = f.values()
    assert abs(v[i] - v[j]) > 5.0


def test_increasing_cover_rejects_failing_witness():
    space, f, _ = square_on_grid()
    bad = LocalWitness.from_triples([(p, 10.0, 0.5) for p in range(space.n)])
    with pytest.raises(PreconditionError):
        increasing_cover(f, bad)


FIXTURES = {
    "square": square_on_grid,
    "reciprocal": reciprocal_on_ray,
    "sin-reciprocal": sin_reciprocal_on_interval,
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_decompose_reconstructs(name):
    space, f, witness = FIXTURES[name]()
    dec = decompose(f, witness)
    assert dec.residual() <= TOL
    for member, bound in zip(dec.members, dec.slice_exponents):
        v = member.values()
        assert np.isfinite(v).all()
        assert np.abs(v).max() <= 2.0 ** bound + TOL
        assert global_lip(member).finite


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_decompose_members_respect_activity(name):
    space, f, witness = FIXTURES[name]()
    dec = decompose(f, witness)
    M = np.stack([m.values() for m in dec.members])
    for p in range(space.n):
        active = set(int(i) for i in dec.series.active_indices(p))
        for i in range(len(dec.members)):
            if i not in active:
                assert M[i, p] == 0.0


def test_decompose_single_slice_for_tame_field():
    space = MetricSpace.from_grid(0.0, 2.0, 0.25)
    f = Tabulated(space, 0.6 + 0.1 * np.sin(space.coords[:, 0]))
    dec = decompose(f, generate_local_witness(f))
    assert len(dec.members) == 1
    assert dec.residual() <= TOL


def test_decompose_dropped_member_fails():
    space, f, witness = square_on_grid()
    dec = decompose(f, witness)
    M = np.stack([m.values() for m in dec.members])
    drop = int(np.argmax(np.abs(M).max(axis=1)))
    partial = M.sum(axis=0) - M[drop]
    gap = np.abs(f.values() - partial)
    culprit = int(np.argmax(gap))
    assert gap[culprit] > TOL


def test_decompose_rejects_failing_witness():
    space, f, _ = square_on_grid()
    bad = LocalWitness.from_triples([(p, 10.0, 0.1) for p in range(space.n)])
    with pytest.raises(PreconditionError):
        decompose(f, bad)


@pytest.mark.parametrize("name,rule", [("square", "bounded"),
                                       ("sin-reciprocal", "bounded"),
                                       ("reciprocal", "unbounded")])
def test_modulus_bounds_all_pairs(name, rule):
    space, f, witness = FIXTURES[name]()
    mod = modulus_witness(f, witness, rule=rule)
    worst, pair = mod.certify(TOL)
    assert worst <= 0.0, pair
    assert (mod.levels >= mod.cover.eta).all()
    assert check_k_lipschitz(mod.level_field, mod.envelope_constant).passed


def test_modulus_constant_field():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    f = Constant(space, 1.0)
    mod = modulus_witness(f, generate_local_witness(f))
    worst, _ = mod.certify(TOL)
    assert worst <= 0.0
    assert np.isfinite(mod.levels).all()


def test_modulus_unknown_rule():
    space, f, witness = square_on_grid()
    with pytest.raises(PreconditionError):
        modulus_witness(f, witness, rule="sideways")


def test_modulus_converse_regenerates_witness():
    space, f, witness = square_on_grid()
    mod = modulus_witness(f, witness)
    D = space.pairwise()
    deltas = [float(D[p][D[p] > 0].min()) for p in range(space.n)]
    regenerated = witness_from_modulus(mod, range(space.n), deltas)
    assert certify_local_witness(f, regenerated).passed


def test_witness_from_modulus_shape_checked():
    space, f, witness = square_on_grid()
    mod = modulus_witness(f, witness)
    with pytest.raises(PreconditionError):
        witness_from_modulus(mod, [0, 1], [0.5])


def ray_extension_problem():
    # X samples (0, 3]; A carries 1/t on the middle band [1, 2]
    space = MetricSpace.from_grid(0.1, 3.0, 0.1)
    t = space.coords[:, 0]
    ids = np.flatnonzero((t >= 1.0 - 1e-12) & (t <= 2.0 + 1e-12))
    A = Subset(space, ids)
    phi = 1.0 / t[ids]
    witness = LocalWitness.from_triples([(int(p), 0.25, 4.0) for p in ids])
    return space, A, phi, witness


def test_local_extend_ray_fixture():
    space, A, phi, witness = ray_extension_problem()
    out = local_extend(A, phi, witness, Interval.at_least(0.0, open_end=True))
    v = out.values()
    assert (v > 0.0).all()
    assert np.abs(v[A.members] - phi).max() <= TOL
    assert out.restriction_error <= TOL
    assert certify_local_witness(out, out.local_witness).passed


def test_local_extend_whole_space_exact():
    space = MetricSpace.from_grid(0.0, 2.0, 0.5)
    phi = np.array([0.5, 0.25, 0.75, 0.5, 1.0])
    A = Subset.whole(space)
    out = local_extend(A, phi, generate_local_witness(Tabulated(space, phi)),
                       Interval.closed(0.0, 1.0))
    assert (out.values() == phi).all()
    assert out.restriction_error == 0.0


def test_local_extend_range_precheck():
    space, A, phi, witness = ray_extension_problem()
    bad = phi.copy()
    bad[0] = -1.0
    with pytest.raises(PreconditionError) as err:
        local_extend(A, bad, witness, Interval.at_least(0.0, open_end=True))
    assert "outside the target" in str(err.value)


def test_local_extend_rejects_offsite_witness():
    space, A, phi, witness = ray_extension_problem()
    stray = LocalWitness.from_triples(
        [(e.point, e.delta, e.constant) for e in witness.entries] + [(0, 0.5, 1.0)])
    with pytest.raises(PreconditionError):
        local_extend(A, phi, stray, Interval.real_line())


def test_local_extend_rejects_failing_witness():
    space, A, phi, witness = ray_extension_problem()
    weak = LocalWitness.from_triples([(int(p), 0.25, 0.01) for p in A.members])
    with pytest.raises(PreconditionError):
        local_extend(A, phi, weak, Interval.real_line())


def test_generated_witness_certifies_by_construction():
    for name in sorted(FIXTURES):
        space, f, _ = FIXTURES[name]()
        assert certify_local_witness(f, generate_local_witness(f)).passed


def test_cusp_has_no_uniform_local_witness():
    # opposite-pair slopes reach 1/t_min = 20, so any uniform rate below
    # that is refuted by some straddling pair
    space, f, pairs = cusp_curve()
    delta = 4.0 * space.dist(*pairs[0])
    for K in (1.0, 5.0, 19.0):
        uniform = LocalWitness.from_triples(
            [(p, delta, K) for p in range(space.n)])
        cert = certify_local_witness(f, uniform)
        assert not cert.passed, K
