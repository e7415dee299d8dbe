"""Hidden one-dimensional Markov field over a finite alphabet.

The latent configuration ``X = (X_0, ..., X_{n-1})`` is a (possibly
inhomogeneous) Markov chain:

    P(x) = initial[x_0] * prod_i kernels[i][x_i, x_{i+1}]

Each epoch of a memory experiment draws a fresh, independent copy of ``X``.
This module provides exact enumeration of the chain law on small instances,
reproducible sampling, and the mixing diagnostics that drive every
concentration bound downstream: the per-bond mixing coefficient (half the
largest L1 distance between two rows of a transition kernel) and the chain
mixing bound ``1 + max_i sum_k prod_{j=i..k} theta_j``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EnumerationLimitError, ValidationError
from .rng import make_generator

__all__ = [
    "ENUM_LIMIT",
    "PROB_ATOL",
    "MarkovFieldSpec",
    "MixingProfile",
    "all_sequences",
    "correlation_decay_profile",
    "exact_field_distribution",
    "mixing_bound",
    "mixing_coefficients",
    "mixing_profile",
    "sample_field",
    "sample_field_batch",
    "site_marginals",
]

# Exact enumeration is refused beyond this many latent configurations.
ENUM_LIMIT = 1 << 20

# Absolute tolerance for "these numbers form a probability distribution".
PROB_ATOL = 1e-12


def _as_distribution(vec, name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a one-dimensional probability vector")
    if np.any(arr < -PROB_ATOL) or np.any(arr > 1.0 + PROB_ATOL):
        raise ValidationError(f"{name} has entries outside [0, 1]")
    total = float(arr.sum())
    if abs(total - 1.0) > PROB_ATOL:
        raise ValidationError(f"{name} sums to {total!r}, expected 1 within {PROB_ATOL}")
    return np.clip(arr, 0.0, 1.0)


@dataclass(frozen=True)
class MarkovFieldSpec:
    """Specification of the latent chain.

    Attributes
    ----------
    n : int
        Number of sites.
    alphabet_size : int
        Number of symbols per site (the same alphabet at every site).
    initial : np.ndarray, shape (alphabet_size,)
        Distribution of the first site.
    kernels : np.ndarray, shape (n - 1, alphabet_size, alphabet_size)
        Row-stochastic transition matrices; ``kernels[i][a, b]`` is the
        probability of symbol ``b`` at site ``i + 1`` given symbol ``a`` at
        site ``i``.
    """

    n: int
    alphabet_size: int
    initial: np.ndarray
    kernels: np.ndarray

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if not isinstance(self.alphabet_size, int) or self.alphabet_size < 2:
            raise ValidationError("alphabet_size must be an integer >= 2")
        if self.alphabet_size > 256:
            raise ValidationError("alphabets larger than 256 symbols are not supported")
        s = self.alphabet_size
        initial = _as_distribution(self.initial, "initial")
        if initial.shape != (s,):
            raise ValidationError(
                f"initial has shape {initial.shape}, expected ({s},)"
            )
        kernels = np.asarray(self.kernels, dtype=float)
        if kernels.size == 0:
            kernels = kernels.reshape(0, s, s)
        if kernels.shape != (self.n - 1, s, s):
            raise ValidationError(
                f"kernels have shape {kernels.shape}, expected ({self.n - 1}, {s}, {s})"
            )
        checked = np.empty_like(kernels)
        for i in range(self.n - 1):
            for a in range(s):
                checked[i, a] = _as_distribution(
                    kernels[i, a], f"kernels[{i}] row {a}"
                )
        initial.setflags(write=False)
        checked.setflags(write=False)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "kernels", checked)

    @property
    def state_count(self) -> int:
        """Total number of latent configurations, alphabet_size ** n."""
        return self.alphabet_size**self.n


@dataclass(frozen=True)
class MixingProfile:
    """Per-bond mixing coefficients and the derived chain mixing bound.

    ``theta[i]`` is half the largest L1 distance between two rows of
    ``kernels[i]``; ``bound`` equals ``1 + max_i sum_{k>=i} prod_{j=i..k}
    theta[j]`` and always lies in ``[1, n]``.
    """

    theta: np.ndarray
    bound: float

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if np.any(theta < 0.0) or np.any(theta > 1.0):
            raise ValidationError("mixing coefficients must lie in [0, 1]")
        n = theta.size + 1
        if not (1.0 - 1e-12 <= self.bound <= n + 1e-9):
            raise ValidationError("mixing bound must lie in [1, n]")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


def mixing_coefficients(spec: MarkovFieldSpec) -> np.ndarray:
    """Per-bond mixing coefficients of the chain.

    For each transition kernel the coefficient is half the maximum, over
    ordered row pairs, of the L1 distance between the rows.  A kernel whose
    rows are identical (the next site does not depend on the current one)
    has coefficient 0; a permutation kernel has coefficient 1.
    """
    kernels = spec.kernels
    if kernels.shape[0] == 0:
        return np.zeros(0)
    diffs = np.abs(kernels[:, :, None, :] - kernels[:, None, :, :]).sum(axis=-1)
    theta = 0.5 * diffs.max(axis=(1, 2))
    return np.clip(theta, 0.0, 1.0)


def mixing_bound(theta) -> float:
    """Chain mixing bound ``1 + max_i sum_{k>=i} prod_{j=i..k} theta[j]``.

    Computed by the backward recursion ``t_i = theta_i * (1 + t_{i+1})``,
    whose running values are exactly the inner sums.  Returns 1.0 for an
    empty coefficient sequence (a single-site chain).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size and (theta.min() < 0.0 or theta.max() > 1.0):
        raise ValidationError("mixing coefficients must lie in [0, 1]")
    best = 0.0
    tail = 0.0
    for t in theta[::-1]:
        tail = float(t) * (1.0 + tail)
        best = max(best, tail)
    return 1.0 + best


def mixing_profile(spec: MarkovFieldSpec) -> MixingProfile:
    """Mixing coefficients of ``spec`` together with the chain bound."""
    theta = mixing_coefficients(spec)
    return MixingProfile(theta=theta, bound=mixing_bound(theta))


def _require_enumerable(spec: MarkovFieldSpec) -> int:
    count = spec.state_count
    if count > ENUM_LIMIT:
        raise EnumerationLimitError(
            f"{spec.alphabet_size}**{spec.n} = {count} latent configurations "
            f"exceed the enumeration limit {ENUM_LIMIT}"
        )
    return count


def exact_field_distribution(spec: MarkovFieldSpec) -> np.ndarray:
    """Exact joint law of the chain as a flat vector of length S**n.

    Sequences are indexed big-endian: site 0 is the most significant digit,
    so ``index = sum_i x_i * S**(n - 1 - i)``.  Use :func:`all_sequences`
    to decode indices back to configurations.
    """
    _require_enumerable(spec)
    s = spec.alphabet_size
    table = spec.initial.copy()
    for kernel in spec.kernels:
        table = (table.reshape(-1, s)[:, :, None] * kernel[None, :, :]).ravel()
    return table


def all_sequences(alphabet_size: int, n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Configurations ``start..stop-1`` in index order, one row per sequence.

    Row ``r`` decodes index ``start + r`` under the big-endian convention of
    :func:`exact_field_distribution`.
    """
    total = alphabet_size**n
    if stop is None:
        stop = total
    if not (0 <= start <= stop <= total):
        raise ValidationError("invalid sequence index range")
    idx = np.arange(start, stop, dtype=np.int64)
    powers = alphabet_size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % alphabet_size).astype(np.uint8)


def site_marginals(spec: MarkovFieldSpec) -> np.ndarray:
    """Marginal distribution of each site, shape (n, alphabet_size)."""
    out = np.empty((spec.n, spec.alphabet_size))
    out[0] = spec.initial
    for i, kernel in enumerate(spec.kernels):
        out[i + 1] = out[i] @ kernel
    return out


def _inverse_cdf_walk(spec: MarkovFieldSpec, u: np.ndarray) -> np.ndarray:
    """Map a (trials, n) uniform block to chain samples by inverse CDF."""
    s = spec.alphabet_size
    trials = u.shape[0]
    x = np.empty((trials, spec.n), dtype=np.uint8)
    cdf0 = np.cumsum(spec.initial)
    x[:, 0] = np.minimum((cdf0[None, :] <= u[:, 0, None]).sum(axis=1), s - 1)
    for i in range(spec.n - 1):
        cdf = np.cumsum(spec.kernels[i], axis=1)
        rows = cdf[x[:, i]]
        x[:, i + 1] = np.minimum((rows <= u[:, i + 1, None]).sum(axis=1), s - 1)
    return x


def sample_field_batch(spec: MarkovFieldSpec, seed: int, trials: int) -> np.ndarray:
    """Draw ``trials`` independent configurations; shape (trials, n).

    Trial ``t`` consumes the ``t``-th row of a (trials, n) uniform block
    from the Philox stream keyed by ``seed``.  The stream is consumed in row
    order, so the first rows of a larger batch coincide with a smaller batch
    drawn from the same seed, and ``sample_field`` equals row 0.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    gen = make_generator(seed)
    u = gen.random((trials, spec.n))
    return _inverse_cdf_walk(spec, u)


def sample_field(spec: MarkovFieldSpec, seed: int) -> np.ndarray:
    """Draw one configuration of the chain; shape (n,)."""
    return sample_field_batch(spec, seed, 1)[0]


def correlation_decay_profile(spec: MarkovFieldSpec, site: int) -> np.ndarray:
    """Conditional-mean gaps between ``site`` and every later site.

    For a binary field, entry ``k - site - 1`` is
    ``|E[X_k | X_site = 1] - E[X_k | X_site = 0]|`` computed by exact
    enumeration.  Each entry is bounded by the product of the mixing
    coefficients of the bonds between the two sites.  When one of the two
    conditioning branches has probability zero the gap is reported as 0.0
    (no correlation is observable through an impossible branch).
    """
    if spec.alphabet_size != 2:
        raise ValidationError("correlation_decay_profile requires a binary field")
    if not 0 <= site < spec.n:
        raise ValidationError(f"site {site} out of range for n={spec.n}")
    law = exact_field_distribution(spec).reshape((2,) * spec.n)
    other_axes = tuple(a for a in range(spec.n) if a != site)
    marginal = law.sum(axis=other_axes)
    out = np.zeros(spec.n - 1 - site)
    if marginal.min() <= 0.0:
        return out
    for k in range(site + 1, spec.n):
        keep = (site, k)
        joint = law.sum(axis=tuple(a for a in range(spec.n) if a not in keep))
        out[k - site - 1] = abs(joint[1, 1] / marginal[1] - joint[0, 1] / marginal[0])
    return out
