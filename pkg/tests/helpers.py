"""Seeded builders shared across the test modules."""

import numpy as np

from lipkit import MetricSpace, Subset, random_k_extension


def make_space(rng, n_max=40, kinds=None):
    """Random space over the four backends; valid metric by construction.
    kinds restricts the draw (0 matrix, 1 points, 2 graph, 3 grid)."""
    kind = int(rng.integers(4)) if kinds is None else int(rng.choice(kinds))
    n = int(rng.integers(3, n_max + 1))
    if kind == 0:
        pts = rng.uniform(-5.0, 5.0, size=(n, 2))
        diff = pts[:, None, :] - pts[None, :, :]
        D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return MetricSpace.from_matrix(0.5 * (D + D.T))
    if kind == 1:
        dim = int(rng.integers(1, 4))
        return MetricSpace.from_points(rng.uniform(-5.0, 5.0, size=(n, dim)))
    if kind == 2:
        # a path keeps the graph connected; chords vary the geometry
        edges = [(i, i + 1, float(rng.uniform(0.1, 2.0))) for i in range(n - 1)]
        for _ in range(int(rng.integers(0, n // 2 + 1))):
            u, v = int(rng.integers(n)), int(rng.integers(n))
            if u != v:
                edges.append((u, v, float(rng.uniform(0.1, 3.0))))
        return MetricSpace.from_graph(n, edges)
    step = float(2.0 ** -int(rng.integers(1, 4)))
    lo = -step * int(rng.integers(0, 8))
    return MetricSpace.from_grid(lo, lo + step * (n - 1), step)


def make_instance(rng, n_max=40):
    """(space, A, phi, K) with A nonempty and phi K-Lipschitz on A.

    phi comes from a seeded greedy extension started at one anchor of
    A, restricted back to A, so the Lipschitz property holds by
    construction at sample resolution.
    """
    space = make_space(rng, n_max)
    size = int(rng.integers(1, space.n + 1))
    A = Subset(space, rng.choice(space.n, size=size, replace=False))
    K = float(rng.uniform(0.2, 4.0))
    anchor = Subset(space, [int(A.members[int(rng.integers(len(A)))])])
    start = np.array([float(rng.uniform(-2.0, 2.0))])
    base = random_k_extension(anchor, start, K, seed=int(rng.integers(2 ** 31)))
    return space, A, base.values()[A.members], K


def make_ball_cover(rng, space, margin=0.3):
    """Random ball-union groups covering every sample.

    Every sample ends up at depth >= margin inside some ball, which
    caps the staircase piece count of the downstream partition.
    """
    n = space.n
    D = space.pairwise()
    diam = max(float(D.max()), 1.0)
    groups = []
    for _ in range(int(rng.integers(1, 4))):
        balls = []
        for _ in range(int(rng.integers(1, 4))):
            balls.append((int(rng.integers(n)), float(rng.uniform(0.3, 1.0) * diam)))
        groups.append(balls)
    depth = np.full(n, -np.inf)
    for balls in groups:
        for c, r in balls:
            depth = np.maximum(depth, r - D[c])
    for p in np.flatnonzero(depth < margin):
        g = int(rng.integers(len(groups)))
        groups[g].append((int(p), float(rng.uniform(2.0, 4.0) * margin)))
    return groups
