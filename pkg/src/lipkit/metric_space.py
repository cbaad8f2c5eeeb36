"""Finite metric samples with interchangeable distance backends.

A space is a set of points with dense integer ids 0..n-1 and a distance
function given by one of four backends: an explicit matrix, a Euclidean
point cloud, shortest-path distances on a weighted graph, or a uniform
1-D grid.  Every downstream construction only ever queries distances
between sample ids, so the backends are freely interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as _sparse
import scipy.sparse.csgraph as _csgraph

from .errors import InputError, PreconditionError

_DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class MetricViolation:
    """One failed metric axiom, with the witnessing ids and its magnitude."""

    kind: str           # "negative", "diagonal", "symmetry", "positivity", "triangle"
    ids: tuple
    magnitude: float

    def describe(self) -> str:
        return f"{self.kind} violation at {self.ids}: {self.magnitude:.6g}"


@dataclass
class ValidationReport:
    """Outcome of a metric-axiom check over all pairs and triples."""

    n: int
    tolerance: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def worst(self):
        if not self.violations:
            return None
        return max(self.violations, key=lambda v: v.magnitude)

    def summary(self) -> str:
        if self.ok:
            return f"metric ok: {self.n} points, tolerance {self.tolerance:g}"
        w = self.worst()
        return (f"metric FAILED: {len(self.violations)} violation(s), "
                f"worst {w.describe()}")


def _validate_matrix(D: np.ndarray, tol: float, max_violations: int = 64) -> ValidationReport:
    n = D.shape[0]
    report = ValidationReport(n=n, tolerance=tol)
    vio = report.violations

    def _push(kind, ids, mag):
        if len(vio) < max_violations:
            vio.append(MetricViolation(kind, ids, float(mag)))

    neg = np.argwhere(D < -tol)
    for i, j in neg:
        _push("negative", (int(i), int(j)), -D[i, j])
    diag = np.abs(np.diag(D))
    for i in np.flatnonzero(diag > tol):
        _push("diagonal", (int(i),), diag[i])
    asym = np.abs(D - D.T)
    for i, j in np.argwhere(np.triu(asym, 1) > tol):
        _push("symmetry", (int(i), int(j)), asym[i, j])
    off = D + np.diag(np.full(n, np.inf))
    for i, j in np.argwhere(np.triu(off <= tol, 1)):
        _push("positivity", (int(i), int(j)), tol - D[i, j])
    # Triangle check vectorized over the middle index.
    for k in range(n):
        excess = D - (D[:, [k]] + D[[k], :])
        bad = np.argwhere(excess > tol)
        for i, j in bad:
            if i != k and j != k and i != j:
                _push("triangle", (int(i), int(k), int(j)), excess[i, j])
        if len(vio) >= max_violations:
            break
    return report


class MetricSpace:
    """Finite metric space; construct through one of the from_* methods."""

    def __init__(self, backend: str, n: int, coords=None, matrix=None,
                 grid=None, validate: bool = True, tol: float = _DEFAULT_TOL):
        self.backend = backend
        self.n = int(n)
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self.grid = grid    # (lo, hi, step) for the grid backend
        if self.n < 1:
            raise InputError("a metric space needs at least one point")
        if validate:
            report = self.validate(tol=tol)
            if not report.ok:
                raise PreconditionError(
                    f"distance data is not a metric: {report.summary()}",
                    witness=report.worst())

    # ---- constructors -------------------------------------------------

    @classmethod
    def from_matrix(cls, D, validate: bool = True, tol: float = _DEFAULT_TOL) -> "MetricSpace":
        D = np.asarray(D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise InputError(f"distance matrix must be square, got shape {D.shape}")
        return cls("matrix", D.shape[0], matrix=D, validate=validate, tol=tol)

    @classmethod
    def from_points(cls, coords, validate: bool = True, tol: float = _DEFAULT_TOL) -> "MetricSpace":
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2:
            raise InputError("point cloud must be an (n, k) array")
        return cls("euclidean", coords.shape[0], coords=coords, validate=validate, tol=tol)

    @classmethod
    def from_graph(cls, n_nodes: int, edges, validate: bool = True,
                   tol: float = _DEFAULT_TOL) -> "MetricSpace":
        """Weighted undirected graph; distances are shortest paths,
        precomputed here once."""
        n_nodes = int(n_nodes)
        rows, cols, weights = [], [], []
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise InputError(f"edge ({u},{v}) outside node range 0..{n_nodes - 1}")
            if w <= 0:
                raise InputError(f"edge ({u},{v}) has nonpositive weight {w}")
            rows.append(u)
            cols.append(v)
            weights.append(w)
        g = _sparse.csr_matrix((weights, (rows, cols)), shape=(n_nodes, n_nodes))
        D = _csgraph.shortest_path(g, method="D", directed=False)
        if np.isinf(D).any():
            i, j = map(int, np.argwhere(np.isinf(D))[0])
            raise InputError(f"graph is disconnected: no path between {i} and {j}")
        return cls("graph", n_nodes, matrix=D, validate=validate, tol=tol)

    @classmethod
    def from_grid(cls, lo: float, hi: float, step: float, validate: bool = True,
                  tol: float = _DEFAULT_TOL) -> "MetricSpace":
        lo, hi, step = float(lo), float(hi), float(step)
        if not (hi > lo):
            raise InputError(f"grid needs hi > lo, got [{lo}, {hi}]")
        if step <= 0:
            raise InputError(f"grid step must be positive, got {step}")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        coords = lo + step * np.arange(count)
        return cls("grid", count, coords=coords[:, None], grid=(lo, hi, step),
                   validate=validate, tol=tol)

    # ---- distance queries ---------------------------------------------

    def dist(self, p: int, q: int) -> float:
        if self._matrix is not None:
            return float(self._matrix[p, q])
        diff = self.coords[p] - self.coords[q]
        return float(np.sqrt(np.dot(diff, diff)))

    def dist_row(self, p: int) -> np.ndarray:
        """Distances from p to every point, computed on demand."""
        if self._matrix is not None:
            return self._matrix[p].copy()
        diff = self.coords - self.coords[p]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def pairwise(self) -> np.ndarray:
        """Full distance matrix, cached after the first request."""
        if self._matrix is None:
            x = self.coords
            sq = np.einsum("ij,ij->i", x, x)
            g = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
            np.maximum(g, 0.0, out=g)
            D = np.sqrt(g)
            np.fill_diagonal(D, 0.0)
            # Exact symmetry; the quadratic form above is symmetric
            # only up to rounding.
            D = np.minimum(D, D.T)
            self._matrix = D
        return self._matrix

    def dist_to_set(self, p: int, members) -> float:
        members = np.asarray(members, dtype=int)
        if members.size == 0:
            raise PreconditionError("distance to the empty set is undefined")
        return float(self.dist_row(p)[members].min())

    def ball(self, center: int, radius: float) -> np.ndarray:
        """Ids strictly within radius of the center (open ball)."""
        return np.flatnonzero(self.dist_row(center) < radius)

    def diameter(self) -> float:
        return float(self.pairwise().max())

    def min_positive_distance(self) -> float:
        D = self.pairwise()
        off = D[np.triu_indices(self.n, 1)]
        pos = off[off > 0]
        if pos.size == 0:
            raise PreconditionError("no positive pairwise distance in this space")
        return float(pos.min())

    # ---- validation ----------------------------------------------------

    def validate(self, tol: float = _DEFAULT_TOL) -> ValidationReport:
        return _validate_matrix(self.pairwise(), tol)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"MetricSpace({self.backend}, n={self.n})"


def validate_metric(space_or_matrix, tol: float = _DEFAULT_TOL) -> ValidationReport:
    """Check all metric axioms exhaustively; triples for the triangle law.

    Accepts a MetricSpace or a raw square array.  Violations carry the
    witnessing ids and the size of the breach.
    """
    if isinstance(space_or_matrix, MetricSpace):
        return space_or_matrix.validate(tol=tol)
    D = np.asarray(space_or_matrix, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError(f"distance matrix must be square, got shape {D.shape}")
    return _validate_matrix(D, tol)


class Subset:
    """Sorted, deduplicated set of sample ids inside a fixed space."""

    def __init__(self, space: MetricSpace, members):
        self.space = space
        members = np.unique(np.asarray(members, dtype=int))
        if members.size and (members[0] < 0 or members[-1] >= space.n):
            raise InputError(
                f"subset ids must lie in 0..{space.n - 1}, got range "
                f"[{members[0]}, {members[-1]}]")
        self.members = members

    @classmethod
    def whole(cls, space: MetricSpace) -> "Subset":
        return cls(space, np.arange(space.n))

    def __contains__(self, p) -> bool:
        i = np.searchsorted(self.members, int(p))
        return i < self.members.size and self.members[i] == int(p)

    def __len__(self) -> int:
        return int(self.members.size)

    def __iter__(self):
        return iter(int(p) for p in self.members)

    def complement(self) -> np.ndarray:
        mask = np.ones(self.space.n, dtype=bool)
        mask[self.members] = False
        return np.flatnonzero(mask)

    def require_nonempty(self, what: str = "subset") -> "Subset":
        if self.members.size == 0:
            raise PreconditionError(f"{what} must be nonempty")
        return self

    def is_closed_at_sample_scale(self) -> bool:
        """True when no outside sample sits at distance zero from the set.

        In a validated metric this always holds; kept as an interface
        contract for callers feeding pseudometric data with validation off.
        """
        if self.members.size in (0, self.space.n):
            return True
        D = self.space.pairwise()
        outside = self.complement()
        return bool(D[np.ix_(outside, self.members)].min() > 0)

    def __repr__(self) -> str:
        return f"Subset({len(self)} of {self.space.n})"
