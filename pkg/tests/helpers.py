"""Cached grids, cached pipeline runs and random test-body generators."""
from functools import lru_cache

import numpy as np

from duallp.ellipsoid_bounds import A1, A3
from duallp.nonuniqueness import PipelineOptions, run_pipeline
from duallp.sphere_core import AxiFn, is_convex, make_grid, principal_radii

SWEEP = (0.4, 0.2, 0.1, 0.05)
A1_SWEEP = (1e2, 1e3, 1e4, 1e5)
A3_SWEEP = (1e-2, 1e-3, 1e-4, 1e-5)

# (n, p, q) for the three construction instances exercised by the suite
PIPELINE_CASES = {
    "q_half": (2, -1.0, 0.5),
    "n3_q2": (3, -1.0, 2.0),
    "q_equals_n": (2, -1.0, 2.0),
}


@lru_cache(maxsize=None)
def grid(n: int, N: int, grading: int = 1):
    return make_grid(n, N, grading)


@lru_cache(maxsize=None)
def pipeline(name: str, N: int = 2048):
    n, p, q = PIPELINE_CASES[name]
    return run_pipeline(p, q, SWEEP, n=n, opts=PipelineOptions(N=N))


def cosine_field(g, coefs, base: float = 1.0) -> AxiFn:
    th = g.nodes
    v = base + sum(c * np.cos(2 * (k + 1) * th) for k, c in enumerate(coefs))
    return AxiFn(g, v)


def random_convex(g, rng: np.random.Generator, modes: int = 3, size: float = 0.08,
                  min_radius: float = 0.0) -> AxiFn:
    """Ball plus small even harmonics, redrawn until convex.

    ``min_radius`` (relative to max h) rejects near-corner draws whose
    principal radii are too small to be resolved by the grid.
    """
    while True:
        h = cosine_field(g, rng.uniform(-size, size, size=modes), base=float(rng.uniform(0.7, 1.5)))
        if is_convex(h) and min(np.min(r) for r in principal_radii(h)) >= min_radius * np.max(h.values):
            return h


def _regime_matrix():
    """(n, p, q, alpha, beta, regime) covering every q-branch and sign-branch."""
    cases = []
    for n in (2, 3):
        for p in (-1.0, -2.0):
            for s in (0.5, 0.0, -0.5):
                for q in (0.5, 1.0, 2.0):
                    cases.append((n, p, q, s - p - n + 1, 0.0, A1))
                for q in (n - 1.5, n - 1.0, n):
                    cases.append((n, p, q, 0.0, s - p - 1, A3))
    return [c for c in cases if c[3] > 1 - c[0] and c[4] > -1]


REGIME_MATRIX = _regime_matrix()
