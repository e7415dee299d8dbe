"""Shared builders for the test suite."""

import numpy as np

from corrmem import HiddenErrorModel, MarkovFieldSpec, PerSiteChannel


def tv_distance(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def chain(n, theta):
    """Homogeneous symmetric binary chain whose mixing coefficient is theta."""
    keep = (1.0 + theta) / 2.0
    kernel = np.array([[keep, 1.0 - keep], [1.0 - keep, keep]])
    return MarkovFieldSpec(
        n=n,
        alphabet_size=2,
        initial=np.array([0.5, 0.5]),
        kernels=np.tile(kernel, (n - 1, 1, 1)).reshape(n - 1, 2, 2),
    )


def random_field(rng, n, alphabet_size=2):
    """A random valid chain: Dirichlet rows, so nothing is degenerate."""
    initial = rng.dirichlet(np.ones(alphabet_size))
    kernels = rng.dirichlet(np.ones(alphabet_size), size=(n - 1, alphabet_size))
    return MarkovFieldSpec(
        n=n, alphabet_size=alphabet_size, initial=initial, kernels=kernels
    )


def random_per_site_model(rng, n, alphabet_size=2):
    field = random_field(rng, n, alphabet_size)
    table = rng.random((n, alphabet_size))
    return HiddenErrorModel(field=field, channel=PerSiteChannel(table=table))
