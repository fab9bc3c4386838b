"""Shared generators for randomized verification tests."""

import numpy as np
import pytest

from woebox.engine import FeaturePartition
from woebox.models import GaussianFullModel, GaussianNBModel


def random_gnb(rng, k=3, d=4, spread=2.0):
    """Random diagonal-Gaussian model with non-uniform priors."""
    means = rng.normal(0.0, spread, size=(k, d))
    variances = rng.uniform(0.3, 2.5, size=(k, d))
    weights = rng.uniform(0.5, 2.0, size=k)
    return GaussianNBModel(
        means=means,
        variances=variances,
        log_priors=np.log(weights / weights.sum()),
        feature_names=tuple(f"x{i}" for i in range(d)),
        class_names=tuple(f"c{i}" for i in range(k)),
    )


def random_spd(rng, d, scale=1.0):
    """Random symmetric positive-definite matrix with a safe spectrum."""
    basis = rng.normal(size=(d, d))
    q, _ = np.linalg.qr(basis)
    eigenvalues = rng.uniform(0.5, 2.0, size=d) * scale
    return (q * eigenvalues) @ q.T


def random_full(rng, k=3, d=3, lda=False, spread=1.5):
    means = rng.normal(0.0, spread, size=(k, d))
    if lda:
        shared = random_spd(rng, d)
        covs = np.broadcast_to(shared, (k, d, d)).copy()
    else:
        covs = np.stack([random_spd(rng, d) for _ in range(k)])
    weights = rng.uniform(0.5, 2.0, size=k)
    return GaussianFullModel(
        means=means,
        covariances=covs,
        log_priors=np.log(weights / weights.sum()),
        feature_names=tuple(f"x{i}" for i in range(d)),
        class_names=tuple(f"c{i}" for i in range(k)),
        lda=lda,
    )


def random_partition(rng, d):
    """Random disjoint cover of range(d) with 1..d atoms."""
    perm = list(rng.permutation(d))
    n_atoms = int(rng.integers(1, d + 1))
    cuts = sorted(rng.choice(range(1, d), size=n_atoms - 1, replace=False)) if n_atoms > 1 else []
    atoms, start = [], 0
    for cut in list(cuts) + [d]:
        atoms.append(tuple(int(i) for i in perm[start:cut]))
        start = cut
    return FeaturePartition(tuple(atoms), tuple(f"g{i}" for i in range(len(atoms))))


def random_disjoint_sets(rng, k):
    """Two random nonempty disjoint class sets out of k classes."""
    while True:
        assignment = rng.integers(0, 3, size=k)
        u = tuple(int(i) for i in np.flatnonzero(assignment == 1))
        v = tuple(int(i) for i in np.flatnonzero(assignment == 2))
        if u and v:
            return u, v


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
