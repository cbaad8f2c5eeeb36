"""Local Lipschitz witnesses and what they buy globally.

A witness is a finite list of entries (p, delta, K): around p, within
distance delta, the function moves at rate at most K.  Entries are
checked on doubled balls so that any two points of a single ball are
covered by one check.  From a certified witness the module builds

  * an increasing cover U_1 <= U_2 <= ... with the two-point bound
    |f(x) - f(y)| <= n d(x, y) inside U_n,
  * a decomposition f = sum psi_n xi_n into bounded Lipschitz pieces
    carried by a partition of unity over dyadic slices of |f|,
  * a symmetric modulus L(x, y) with |f(x) - f(y)| <= L(x, y) d(x, y)
    from per-point levels, in a bounded and an unbounded flavor,
  * an extension of a function given on part of the sample to all of
    it, staying inside a prescribed interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certify import _as_values_on, certify_local_witness
from .errors import CoverError, PreconditionError
from .extension import Envelope, extend_to_interval
from .metric_space import Subset
from .partition_of_unity import (CozeroCover, frolik_pou, index_subordinate)
from .scalar_field import (Constant, DistanceTo, Interval, ScalarField,
                           Series, Tabulated, maximum, minimum)

_DEFAULT_TOL = 1e-9
_DEFAULT_MAX_SLICES = 8


@dataclass(frozen=True)
class WitnessEntry:
    point: int
    delta: float
    constant: float


@dataclass
class LocalWitness:
    """Finite local Lipschitz certificate: near entry.point, within
    entry.delta, the certified function moves at rate entry.constant."""

    entries: list
    notes: list = field(default_factory=list)

    @classmethod
    def from_triples(cls, triples) -> "LocalWitness":
        entries = []
        for p, delta, K in triples:
            delta = float(delta)
            K = float(K)
            if not (delta > 0.0):
                raise PreconditionError(f"entry at {p} needs a positive radius")
            if not (K >= 0.0 and math.isfinite(K)):
                raise PreconditionError(f"entry at {p} needs a finite rate")
            entries.append(WitnessEntry(int(p), delta, K))
        if not entries:
            raise PreconditionError("a witness needs at least one entry")
        return cls(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def points(self) -> np.ndarray:
        return np.array([e.point for e in self.entries], dtype=int)


def generate_local_witness(f: ScalarField, deltas=None) -> LocalWitness:
    """Exhaustive witness for f with one entry per sample.

    Default radii reach the nearest distinct sample, and each rate is
    the largest two-point slope of f inside the doubled ball, so the
    witness certifies by construction.
    """
    space = f.space
    D = space.pairwise()
    v = f.values()
    triples = []
    for p in range(space.n):
        if deltas is None:
            row = D[p][D[p] > 0.0]
            delta = float(row.min()) if row.size else 1.0
        else:
            delta = float(deltas[p])
        ids = np.flatnonzero(D[p] < 2.0 * delta)
        sub_d = D[np.ix_(ids, ids)]
        sub_o = np.abs(v[ids][:, None] - v[ids][None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(sub_d > 0.0, sub_o / sub_d, 0.0)
        triples.append((p, delta, float(ratios.max(initial=0.0))))
    return LocalWitness.from_triples(triples)


# ---------------------------------------------------------------------------
# Increasing covers


@dataclass
class IncreasingCover:
    """Nested sets U_n with |osc| <= n d between any two points of U_n.

    eta[x] is the first threshold whose set contains sample x; the
    thresholds are the distinct ceilings of the entry levels
    max(K_p, osc_bound / delta_p).
    """

    space: object
    entries: list
    levels: np.ndarray
    thresholds: np.ndarray
    memberships: dict
    eta: np.ndarray
    osc_bound: float
    oscillation: np.ndarray

    def set_at(self, n: int) -> np.ndarray:
        out = np.zeros(self.space.n, dtype=bool)
        for t in self.thresholds:
            if t <= n:
                out |= self.memberships[int(t)]
        return out

    def soundness_check(self, tol: float = _DEFAULT_TOL):
        """Worst violation of the two-point bound, with its witness."""
        D = self.space.pairwise()
        worst = -math.inf
        witness = None
        for t in self.thresholds:
            ids = np.flatnonzero(self.memberships[int(t)])
            sub = self.oscillation[np.ix_(ids, ids)] - float(t) * D[np.ix_(ids, ids)]
            np.fill_diagonal(sub, -math.inf)
            if sub.size <= len(ids):
                continue
            k = int(np.argmax(sub))
            i, j = np.unravel_index(k, sub.shape)
            if float(sub[i, j]) > worst:
                worst = float(sub[i, j])
                witness = (int(t), (int(ids[i]), int(ids[j])))
        return worst, witness


def _cover_from_oscillation(space, witness: LocalWitness, osc: np.ndarray,
                            tol: float, bound=None) -> IncreasingCover:
    D = space.pairwise()
    osc_bound = float(osc.max(initial=0.0))
    if bound is not None:
        if osc_bound > float(bound) + tol:
            i, j = np.unravel_index(int(np.argmax(osc)), osc.shape)
            raise PreconditionError(
                f"oscillation {osc_bound:.6g} exceeds the supplied bound "
                f"{float(bound):.6g}", witness=(int(i), int(j)))
        osc_bound = float(bound)
    levels = np.empty(len(witness))
    for j, e in enumerate(witness.entries):
        ids = np.flatnonzero(D[e.point] < 2.0 * e.delta)
        excess = osc[np.ix_(ids, ids)] - e.constant * D[np.ix_(ids, ids)]
        hi = float(excess.max())
        if hi > tol:
            i, k = np.unravel_index(int(np.argmax(excess)), excess.shape)
            raise PreconditionError(
                f"entry {j} at point {e.point} fails on its doubled ball "
                f"by {hi:.3e}", witness=(j, (int(ids[i]), int(ids[k]))))
        levels[j] = max(e.constant, osc_bound / e.delta)
    ceilings = np.maximum(1, np.ceil(levels - tol).astype(int))
    thresholds = np.unique(ceilings)
    memberships = {}
    grown = np.zeros(space.n, dtype=bool)
    eta = np.full(space.n, -1, dtype=int)
    for t in thresholds:
        for j, e in enumerate(witness.entries):
            if ceilings[j] <= t:
                grown |= D[e.point] < e.delta
        memberships[int(t)] = grown.copy()
        fresh = grown & (eta < 0)
        eta[fresh] = int(t)
    uncovered = np.flatnonzero(eta < 0)
    if uncovered.size:
        raise CoverError(
            f"{uncovered.size} sample(s) lie in no witness ball, "
            f"first is {int(uncovered[0])}")
    return IncreasingCover(space, list(witness.entries), levels, thresholds,
                           memberships, eta, osc_bound, osc)


def increasing_cover(f: ScalarField, witness: LocalWitness, bound=None,
                     tol: float = _DEFAULT_TOL) -> IncreasingCover:
    """Increasing cover of the sample from a local witness for f.

    bound is a witnessed oscillation bound for f; it defaults to the
    measured sample oscillation and enters the entry levels as
    max(K_p, bound / delta_p).
    """
    v = f.values()
    osc = np.abs(v[:, None] - v[None, :])
    return _cover_from_oscillation(f.space, witness, osc, tol, bound=bound)


# ---------------------------------------------------------------------------
# Moduli of Lipschitz type


@dataclass
class ModulusWitness:
    """Symmetric pair rates L(x, y) with |f(x) - f(y)| <= L(x, y) d(x, y).

    Bounded flavor: L(x, y) = max(level_x, level_y).  Unbounded flavor:
    the levels are built for the compressed oscillation o/(1 + o), and
    L(x, y) = (1 + |f(x) - f(y)|) max(level_x, level_y).
    """

    kind: str
    space: object
    levels: np.ndarray
    level_field: ScalarField
    envelope_constant: float
    f_values: np.ndarray
    cover: IncreasingCover

    def evaluate(self, x: int, y: int) -> float:
        base = max(float(self.levels[x]), float(self.levels[y]))
        if self.kind == "unbounded":
            base *= 1.0 + abs(float(self.f_values[x]) - float(self.f_values[y]))
        return base

    def matrix(self) -> np.ndarray:
        base = np.maximum(self.levels[:, None], self.levels[None, :])
        if self.kind == "unbounded":
            base = base * (1.0 + np.abs(self.f_values[:, None]
                                        - self.f_values[None, :]))
        return base

    def certify(self, rel_tol: float = _DEFAULT_TOL):
        """Worst relative excess of |osc| over L d across sample pairs."""
        D = self.space.pairwise()
        osc = np.abs(self.f_values[:, None] - self.f_values[None, :])
        cap = self.matrix() * D
        excess = osc - cap * (1.0 + rel_tol)
        np.fill_diagonal(excess, -math.inf)
        k = int(np.argmax(excess))
        i, j = np.unravel_index(k, excess.shape)
        return float(excess[i, j]), (int(i), int(j))


def modulus_witness(f: ScalarField, witness: LocalWitness, rule: str = "bounded",
                    tol: float = _DEFAULT_TOL) -> ModulusWitness:
    """Per-point levels whose pairwise maximum bounds the slope of f.

    The level of a sample is the first threshold of the increasing
    cover that reaches it; spreading the levels by the lower envelope
    with the constant (max level) / (min positive distance) leaves the
    sample values unchanged while making the level function Lipschitz.
    The unbounded rule compresses the oscillation to o/(1 + o) first,
    which is bounded by one, and restores the scale in the pair rate.
    """
    if rule not in ("bounded", "unbounded"):
        raise PreconditionError(f"unknown rule {rule!r}")
    space = f.space
    v = f.values()
    osc = np.abs(v[:, None] - v[None, :])
    if rule == "unbounded":
        osc = osc / (1.0 + osc)
    cover = _cover_from_oscillation(space, witness, osc, tol)
    eta = cover.eta.astype(float)
    try:
        gap = space.min_positive_distance()
    except Exception:
        gap = math.inf
    M = 0.0 if not math.isfinite(gap) else float(eta.max()) / gap
    all_ids = np.arange(space.n)
    level_field = Envelope(space, all_ids, eta, np.full(space.n, M), -1)
    return ModulusWitness(rule, space, level_field.values(), level_field, M,
                          v, cover)


def witness_from_modulus(modulus: ModulusWitness, points, deltas) -> LocalWitness:
    """Local witness whose rates dominate the modulus on doubled balls."""
    points = [int(p) for p in points]
    deltas = [float(d) for d in deltas]
    if len(points) != len(deltas):
        raise PreconditionError("need one radius per point")
    D = modulus.space.pairwise()
    L = modulus.matrix()
    triples = []
    for p, delta in zip(points, deltas):
        ids = np.flatnonzero(D[p] < 2.0 * delta)
        K = float(L[np.ix_(ids, ids)].max(initial=0.0))
        triples.append((p, delta, K))
    return LocalWitness.from_triples(triples)


# ---------------------------------------------------------------------------
# Dyadic slice assignment shared by decompose and local_extend


def _slice_groups(ball_peaks, max_slices):
    """Assign balls to dyadic slices by peak |f| over their samples.

    A ball with peak m first fits the slice {|f| < 2^j} at
    j = floor(log2 m) + 1.  Keeping only the largest max_slices
    distinct thresholds lumps small balls upward, which keeps the
    downstream staircase family small; the top slice holds every ball.
    Returns (exponents descending, list of ball index lists, nested).
    """
    firsts = []
    for m in ball_peaks:
        firsts.append(None if m == 0.0 else int(math.floor(math.log2(m))) + 1)
    distinct = sorted({j for j in firsts if j is not None})
    if not distinct:
        distinct = [0]
    kept = distinct[-max_slices:]
    exps = sorted(kept, reverse=True)
    groups = []
    for j in exps:
        members = [b for b, fj in enumerate(firsts)
                   if fj is None or fj <= j]
        groups.append(members)
    return exps, groups


def _ball_union_field(space, balls) -> ScalarField:
    """max(0, radius - d(center, .)) over the balls: 1-Lipschitz and
    positive exactly on the union of the open balls."""
    bump = None
    for center, radius in balls:
        tent = Constant(space, float(radius)) - DistanceTo(space, [int(center)])
        bump = tent if bump is None else maximum(bump, tent)
    return maximum(bump, Constant(space, 0.0))


# ---------------------------------------------------------------------------
# Decomposition into bounded Lipschitz pieces


@dataclass
class Decomposition:
    """f as a finite sum psi_n xi_n of bounded Lipschitz members."""

    f: ScalarField
    series: Series
    members: list
    weights: list          # the xi_n, a partition of unity
    pieces: list           # the psi_n, bounded Lipschitz extensions
    supports: list         # sample ids where each xi_n is positive
    constants: list        # exact pair slope of f on each support
    slice_exponents: list  # |f| < 2^j bound carried by each member
    partition: object

    def residual(self) -> float:
        return float(np.abs(self.f.values() - self.series.values()).max())


def decompose(f: ScalarField, witness: LocalWitness, tol: float = _DEFAULT_TOL,
              max_slices: int = _DEFAULT_MAX_SLICES,
              max_members: int = 50_000) -> Decomposition:
    """Write f as a finite sum of bounded Lipschitz members.

    Witness balls are grouped into dyadic slices of |f| (a ball joins
    the first slice containing all its samples), the groups carry a
    partition of unity, and on each group's active set f is extended
    within its own range.  Every active weight sits inside its piece's
    anchor set, so the sum returns f up to the partition's unit-sum
    residual.
    """
    space = f.space
    cert = certify_local_witness(f, witness, tol=tol)
    if not cert.passed:
        raise PreconditionError(
            f"witness does not certify the function: {cert.summary_line()}",
            witness=cert.witness)
    v = f.values()
    D = space.pairwise()
    balls = [(e.point, e.delta) for e in witness.entries]
    peaks = []
    for center, radius in balls:
        ids = np.flatnonzero(D[center] < radius)
        peaks.append(float(np.abs(v[ids]).max(initial=0.0)))
    exps, groups = _slice_groups(peaks, max_slices)
    cover = CozeroCover(space, [
        _ball_union_field(space, [balls[b] for b in grp]) for grp in groups],
        tol)
    pou = frolik_pou(cover, tol, max_members)
    grouped = index_subordinate(pou)

    weights, pieces, members = [], [], []
    supports, constants, bounds = [], [], []
    for gi, n in enumerate(grouped.set_index):
        xi = grouped.members[gi]
        supp = np.flatnonzero(xi.values() > 0.0)
        if supp.size == 0:
            weights.append(xi)
            pieces.append(Constant(space, 0.0))
            members.append(Constant(space, 0.0))
            supports.append(supp)
            constants.append(0.0)
            bounds.append(exps[n])
            continue
        vals = v[supp]
        lo, hi = float(vals.min()), float(vals.max())
        sub_d = D[np.ix_(supp, supp)]
        sub_o = np.abs(vals[:, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            K = float(np.where(sub_d > 0.0, sub_o / sub_d, 0.0).max(initial=0.0))
        if lo == hi:
            psi = Constant(space, lo)
        else:
            psi = extend_to_interval(Subset(space, supp), vals, K,
                                     Interval.closed(lo, hi), tol)
        weights.append(xi)
        pieces.append(psi)
        members.append(psi * xi)
        supports.append(supp)
        constants.append(K)
        bounds.append(exps[n])
    series = Series(space, members, grouped.activity)
    return Decomposition(f, series, members, weights, pieces, supports,
                         constants, bounds, grouped)


# ---------------------------------------------------------------------------
# Local-to-global extension


def local_extend(A: Subset, phi, witness: LocalWitness, interval: Interval,
                 tol: float = _DEFAULT_TOL,
                 max_slices: int = _DEFAULT_MAX_SLICES,
                 max_members: int = 50_000) -> ScalarField:
    """Extend phi from A to the whole sample from a local witness.

    The witness (entries centered in A) is certified against phi on A
    first; a failing pair is reported and nothing is built.  Witness
    balls, read over the whole space, carry a partition of unity
    together with one extra set living off A; each ball group extends
    phi from the A-part of its active set into the target interval, the
    extra set contributes a constant from the sampled range, and the
    weighted sum restricts to phi on A up to the unit-sum residual.
    """
    space = A.space
    A.require_nonempty("extension domain")
    if interval.is_degenerate:
        raise PreconditionError(f"degenerate target interval {interval}")
    vals = _as_values_on(A, phi)
    for i, x in zip(A.members, vals):
        if not interval.contains(float(x)):
            raise PreconditionError(
                f"phi({int(i)}) = {x!r} lies outside the target {interval}",
                witness=int(i))
    in_A = np.zeros(space.n, dtype=bool)
    in_A[A.members] = True
    for j, e in enumerate(witness.entries):
        if not in_A[e.point]:
            raise PreconditionError(
                f"witness entry {j} is centered at {e.point}, outside the domain")

    stub = np.zeros(space.n)
    stub[A.members] = vals
    cert = certify_local_witness(Tabulated(space, stub), witness,
                                 domain=A, tol=tol)
    if not cert.passed:
        raise PreconditionError(
            f"witness does not certify phi on the domain: {cert.summary_line()}",
            witness=cert.witness)

    if len(A) == space.n:
        # nothing to extend: the partition collapses and phi comes back
        out = Tabulated(space, np.array(vals, dtype=float))
        out.pieces = [out]
        out.partition = None
        out.slice_labels = []
        out.restriction_error = 0.0
        out.local_witness = witness
        return out

    D = space.pairwise()
    balls = [(e.point, e.delta) for e in witness.entries]
    peaks = []
    for center, radius in balls:
        ids = np.flatnonzero((D[center] < radius) & in_A)
        peaks.append(float(np.abs(vals[np.searchsorted(A.members, ids)])
                           .max(initial=0.0)))
    exps, groups = _slice_groups(peaks, max_slices)

    fields = []
    labels = []
    off = minimum(Constant(space, 1.0), DistanceTo(space, A.members))
    fields.append(off)
    labels.append("off-domain")
    for j, grp in zip(exps, groups):
        fields.append(_ball_union_field(space, [balls[b] for b in grp]))
        labels.append(j)
    cover = CozeroCover(space, fields, tol)
    pou = frolik_pou(cover, tol, max_members)
    grouped = index_subordinate(pou)

    mid = 0.5 * (float(vals.min()) + float(vals.max()))
    pieces = []
    for gi, n in enumerate(grouped.set_index):
        if labels[n] == "off-domain":
            pieces.append(Constant(space, mid))
            continue
        xi = grouped.members[gi]
        supp = np.flatnonzero((xi.values() > 0.0) & in_A)
        if supp.size == 0:
            grp = groups[n - 1]
            reach = np.zeros(space.n, dtype=bool)
            for b in grp:
                center, radius = balls[b]
                reach |= D[center] < radius
            supp = np.flatnonzero(reach & in_A)
        sub = Subset(space, supp)
        sub_vals = vals[np.searchsorted(A.members, supp)]
        sub_d = D[np.ix_(supp, supp)]
        sub_o = np.abs(sub_vals[:, None] - sub_vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            K = float(np.where(sub_d > 0.0, sub_o / sub_d, 0.0).max(initial=0.0))
        pieces.append(extend_to_interval(sub, sub_vals, K, interval, tol))

    members = [pieces[gi] * grouped.members[gi]
               for gi in range(len(grouped.members))]
    out = Series(space, members, grouped.activity)
    out.pieces = pieces
    out.partition = grouped
    out.slice_labels = labels
    out.restriction_error = float(
        np.abs(out.values()[A.members] - vals).max())
    out.local_witness = generate_local_witness(out)
    return out
