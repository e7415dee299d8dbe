"""Observed error vectors conditioned on a hidden Markov field.

Given a latent configuration ``x``, the error bits are conditionally
independent: ``P(y | x) = prod_i q_i(y_i | x)``, and the law of the error
vector is the mixture ``P(y) = sum_x P(x) P(y | x)``.  Three conditional
channels are provided:

* :class:`PerSiteChannel` -- ``q_i`` depends only on ``x_i``;
* :class:`WindowChannel` -- ``q_i`` depends on the symbols within a fixed
  radius of site ``i`` (sites beyond the boundary are read as symbol 0);
* :class:`GlobalThresholdChannel` -- for binary fields: ``y = x`` while the
  total weight of ``x`` stays at or below a threshold, and ``y`` is the
  all-ones vector the moment the weight exceeds it.

Error vectors are plain uint8 arrays of zeros and ones; a one marks an
erroneous site.

The conditional mean error count ``sum_i q_i(1 | x)`` is a Lipschitz
function of ``x`` under the Hamming distance.  Per-site channels keep the
constant at or below the largest per-site oscillation; the global threshold
channel concentrates a jump of ``n - floor(threshold)`` on a single flip,
which is the separation that makes thresholded errors qualitatively harder
than any per-site channel.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EnumerationLimitError, ValidationError
from .field import (
    ENUM_LIMIT,
    MarkovFieldSpec,
    _inverse_cdf_walk,
    all_sequences,
    exact_field_distribution,
    site_marginals,
)
from .rng import make_generator

__all__ = [
    "MAX_WINDOW_RADIUS",
    "ChannelSpec",
    "CovarianceEstimate",
    "GlobalThresholdChannel",
    "HiddenErrorModel",
    "MonteCarloScalar",
    "PerSiteChannel",
    "WindowChannel",
    "conditional_weight_table",
    "covariance_matrix",
    "error_rate",
    "exact_error_distribution",
    "expected_errors",
    "lipschitz_constant",
    "sample_errors",
    "sample_errors_batch",
    "site_error_rates",
    "weight_distribution",
]

# Window channels beyond this radius blow up table sizes exponentially and
# are rejected outright.
MAX_WINDOW_RADIUS = 3

_MIN_MC_TRIALS = 1000

_CHUNK = 4096


@dataclass(frozen=True)
class PerSiteChannel:
    """Per-site error probabilities: ``table[i, s] = P(Y_i = 1 | X_i = s)``."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise ValidationError("per-site table must have shape (n, alphabet_size)")
        if np.any(table < 0.0) or np.any(table > 1.0):
            raise ValidationError("per-site error probabilities must lie in [0, 1]")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n(self) -> int:
        return self.table.shape[0]


@dataclass(frozen=True)
class WindowChannel:
    """Error probabilities reading a symmetric window around each site.

    ``table[i, j]`` is ``P(Y_i = 1 | neighborhood j)`` where ``j`` encodes
    the symbols at sites ``i - radius .. i + radius`` big-endian (leftmost
    site most significant) and out-of-range sites contribute symbol 0.
    """

    radius: int
    table: np.ndarray

    def __post_init__(self):
        if not isinstance(self.radius, int) or self.radius < 0:
            raise ValidationError("window radius must be a non-negative integer")
        if self.radius > MAX_WINDOW_RADIUS:
            raise ValidationError(
                f"window radius {self.radius} exceeds the supported maximum "
                f"{MAX_WINDOW_RADIUS}"
            )
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise ValidationError(
                "window table must have shape (n, alphabet_size ** (2 * radius + 1))"
            )
        if np.any(table < 0.0) or np.any(table > 1.0):
            raise ValidationError("window error probabilities must lie in [0, 1]")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n(self) -> int:
        return self.table.shape[0]


@dataclass(frozen=True)
class GlobalThresholdChannel:
    """Identity channel that switches to all-ones above a weight threshold.

    Binary fields only: ``y = x`` when ``sum(x) <= threshold`` and
    ``y = (1, ..., 1)`` otherwise.
    """

    threshold: float

    def __post_init__(self):
        threshold = float(self.threshold)
        if not math.isfinite(threshold):
            raise ValidationError("threshold must be finite")
        object.__setattr__(self, "threshold", threshold)


ChannelSpec = Union[PerSiteChannel, WindowChannel, GlobalThresholdChannel]


@dataclass(frozen=True)
class HiddenErrorModel:
    """A latent Markov field together with a conditional error channel."""

    field: MarkovFieldSpec
    channel: ChannelSpec

    def __post_init__(self):
        f, c = self.field, self.channel
        if isinstance(c, PerSiteChannel):
            if c.table.shape != (f.n, f.alphabet_size):
                raise ValidationError(
                    f"per-site table has shape {c.table.shape}, expected "
                    f"({f.n}, {f.alphabet_size})"
                )
        elif isinstance(c, WindowChannel):
            width = f.alphabet_size ** (2 * c.radius + 1)
            if c.table.shape != (f.n, width):
                raise ValidationError(
                    f"window table has shape {c.table.shape}, expected ({f.n}, {width})"
                )
        elif isinstance(c, GlobalThresholdChannel):
            if f.alphabet_size != 2:
                raise ValidationError("global threshold channels require a binary field")
        else:
            raise ValidationError(f"unknown channel type {type(c).__name__}")

    @property
    def n(self) -> int:
        return self.field.n


@dataclass(frozen=True)
class MonteCarloScalar:
    """A scalar Monte Carlo estimate with a normal 95% confidence interval."""

    value: float
    stderr: float
    ci_lo: float
    ci_hi: float
    trials: int


@dataclass(frozen=True)
class CovarianceEstimate:
    """Sampled covariance matrix with elementwise standard errors."""

    values: np.ndarray
    stderr: np.ndarray
    trials: int


def _site_probabilities(model: HiddenErrorModel, x: np.ndarray) -> np.ndarray:
    """Conditional error probabilities ``q_i(1 | x)`` for a batch of x rows."""
    c = model.channel
    n = model.n
    if isinstance(c, PerSiteChannel):
        return c.table[np.arange(n)[None, :], x]
    if isinstance(c, WindowChannel):
        s = model.field.alphabet_size
        idx = np.zeros(x.shape, dtype=np.int64)
        for d in range(-c.radius, c.radius + 1):
            cols = np.arange(n) + d
            valid = (cols >= 0) & (cols < n)
            vals = np.where(valid[None, :], x[:, np.clip(cols, 0, n - 1)], 0)
            idx = idx * s + vals
        return c.table[np.arange(n)[None, :], idx]
    weights = x.sum(axis=1)
    return np.where((weights <= c.threshold)[:, None], x, 1).astype(float)


def expected_errors(model: HiddenErrorModel, x) -> float:
    """Conditional mean number of errors, ``sum_i q_i(1 | x)``."""
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (model.n,):
        raise ValidationError(f"configuration must have shape ({model.n},)")
    if x.max(initial=0) >= model.field.alphabet_size:
        raise ValidationError("configuration contains symbols outside the alphabet")
    return float(_site_probabilities(model, x[None, :])[0].sum())


def sample_errors_batch(model: HiddenErrorModel, seed: int, trials: int) -> np.ndarray:
    """Draw ``trials`` error vectors; shape (trials, n), dtype uint8.

    Trial ``t`` consumes the ``t``-th block of ``2 n`` uniforms from the
    stream — first ``n`` drive the latent chain, the rest threshold the
    conditional error probabilities — so a batch is a prefix-stable
    concatenation of single-trial draws.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    gen = make_generator(seed)
    u = gen.random((trials, 2, model.n))
    x = _inverse_cdf_walk(model.field, u[:, 0, :])
    q = _site_probabilities(model, x)
    return (u[:, 1, :] < q).astype(np.uint8)


def sample_errors(model: HiddenErrorModel, seed: int) -> np.ndarray:
    """Draw one error vector; shape (n,), dtype uint8."""
    return sample_errors_batch(model, seed, 1)[0]


def _require_enumerable_states(model: HiddenErrorModel) -> int:
    count = model.field.state_count
    if count > ENUM_LIMIT:
        raise EnumerationLimitError(
            f"{model.field.alphabet_size}**{model.n} latent configurations "
            f"exceed the enumeration limit {ENUM_LIMIT}"
        )
    return count


def _enumerate_chunks(model: HiddenErrorModel):
    """Yield (field probabilities, conditional error probabilities) chunks."""
    count = _require_enumerable_states(model)
    law = exact_field_distribution(model.field)
    s, n = model.field.alphabet_size, model.n
    for start in range(0, count, _CHUNK):
        stop = min(start + _CHUNK, count)
        x = all_sequences(s, n, start, stop)
        yield law[start:stop], _site_probabilities(model, x)


def exact_error_distribution(model: HiddenErrorModel) -> np.ndarray:
    """Exact law of the error vector as a flat vector of length 2**n.

    Error vectors are indexed big-endian (site 0 most significant), matching
    the convention of :func:`corrmem.field.exact_field_distribution`.
    """
    n = model.n
    if 2**n > ENUM_LIMIT:
        raise EnumerationLimitError(
            f"2**{n} error vectors exceed the enumeration limit {ENUM_LIMIT}"
        )
    out = np.zeros(2**n)
    for p_chunk, q_chunk in _enumerate_chunks(model):
        cond = np.ones((p_chunk.size, 1))
        for i in range(n):
            qi = q_chunk[:, i][:, None, None]
            probs = np.concatenate([1.0 - qi, qi], axis=2)
            cond = (cond[:, :, None] * probs).reshape(cond.shape[0], -1)
        out += p_chunk @ cond
    return out


def site_error_rates(model: HiddenErrorModel) -> np.ndarray:
    """Exact per-site error probabilities ``E[Y_i]``, shape (n,).

    Per-site channels are resolved through the site marginals of the chain
    in O(n * alphabet_size^2); other channels enumerate the latent space.
    """
    if isinstance(model.channel, PerSiteChannel):
        marginals = site_marginals(model.field)
        return (marginals * model.channel.table).sum(axis=1)
    acc = np.zeros(model.n)
    for p_chunk, q_chunk in _enumerate_chunks(model):
        acc += p_chunk @ q_chunk
    return acc


def error_rate(model: HiddenErrorModel, mode: str = "exact", trials: int | None = None, seed: int | None = None):
    """Mean per-site error probability ``(1/n) sum_i E[Y_i]``.

    ``mode="exact"`` returns a float; ``mode="mc"`` samples ``trials`` error
    vectors and returns a :class:`MonteCarloScalar` with a 95% interval.
    """
    if mode == "exact":
        return float(site_error_rates(model).mean())
    if mode != "mc":
        raise ValidationError(f"unknown mode {mode!r}")
    if trials is None or trials < _MIN_MC_TRIALS:
        raise ValidationError(f"Monte Carlo mode requires trials >= {_MIN_MC_TRIALS}")
    if seed is None:
        raise ValidationError("Monte Carlo mode requires a seed")
    y = sample_errors_batch(model, seed, trials)
    per_trial = y.mean(axis=1)
    value = float(per_trial.mean())
    stderr = float(per_trial.std(ddof=1) / math.sqrt(trials))
    return MonteCarloScalar(
        value=value,
        stderr=stderr,
        ci_lo=value - 1.96 * stderr,
        ci_hi=value + 1.96 * stderr,
        trials=trials,
    )


def _psi_table(model: HiddenErrorModel) -> np.ndarray:
    """Conditional mean error count for every latent configuration."""
    parts = [q_chunk.sum(axis=1) for _, q_chunk in _enumerate_chunks(model)]
    return np.concatenate(parts)


def lipschitz_constant(model: HiddenErrorModel, method: str = "auto") -> float:
    """Hamming-Lipschitz constant of the conditional mean error count.

    ``method="closed_form"`` (per-site channels only) returns the largest
    per-site oscillation of the error probability.  ``method="brute_force"``
    enumerates all single-site flips.  ``method="auto"`` uses the closed
    form when available and brute force otherwise.
    """
    if method not in ("auto", "closed_form", "brute_force"):
        raise ValidationError(f"unknown method {method!r}")
    if method in ("auto", "closed_form") and isinstance(model.channel, PerSiteChannel):
        table = model.channel.table
        return float((table.max(axis=1) - table.min(axis=1)).max())
    if method == "closed_form":
        raise ValidationError("closed form is only available for per-site channels")
    psi = _psi_table(model)
    s, n = model.field.alphabet_size, model.n
    best = 0.0
    for axis in range(n):
        view = psi.reshape(s**axis, s, s ** (n - 1 - axis))
        gap = (view.max(axis=1) - view.min(axis=1)).max(initial=0.0)
        best = max(best, float(gap))
    return best


def covariance_matrix(model: HiddenErrorModel, mode: str = "exact", trials: int | None = None, seed: int | None = None):
    """Covariance matrix of the error bits.

    ``mode="exact"`` enumerates the latent space and returns an (n, n)
    array; the diagonal holds ``Var(Y_i)``.  ``mode="mc"`` pools exact
    integer counts over ``trials`` sampled vectors and returns a
    :class:`CovarianceEstimate` whose ``stderr`` is the asymptotic standard
    error of each entry.
    """
    n = model.n
    if mode == "exact":
        mean = np.zeros(n)
        second = np.zeros((n, n))
        for p_chunk, q_chunk in _enumerate_chunks(model):
            mean += p_chunk @ q_chunk
            second += (q_chunk * p_chunk[:, None]).T @ q_chunk
        cov = second - np.outer(mean, mean)
        np.fill_diagonal(cov, mean * (1.0 - mean))
        return cov
    if mode != "mc":
        raise ValidationError(f"unknown mode {mode!r}")
    if trials is None or trials < _MIN_MC_TRIALS:
        raise ValidationError(f"Monte Carlo mode requires trials >= {_MIN_MC_TRIALS}")
    if seed is None:
        raise ValidationError("Monte Carlo mode requires a seed")
    y = sample_errors_batch(model, seed, trials).astype(np.int64)
    counts = y.sum(axis=0)
    joint = y.T @ y
    mu = counts / trials
    second = joint / trials
    cov = second - np.outer(mu, mu)
    np.fill_diagonal(cov, mu * (1.0 - mu))
    # Asymptotic variance of the sample covariance of two indicator
    # variables, entirely determined by the pooled first and second moments.
    a = 1.0 - 2.0 * mu
    fourth = (
        second * np.outer(a, a)
        + np.outer(mu * a, mu**2)
        + np.outer(mu**2, mu * a)
        + np.outer(mu**2, mu**2)
    )
    var = np.maximum(fourth - cov**2, 0.0) / trials
    return CovarianceEstimate(values=cov, stderr=np.sqrt(var), trials=trials)


def _weight_dp(q_rows: np.ndarray) -> np.ndarray:
    """Sum-of-independent-bits recursion: (B, n) rates -> (B, n + 1) laws."""
    block, n = q_rows.shape
    dp = np.zeros((block, n + 1))
    dp[:, 0] = 1.0
    for i in range(n):
        qi = q_rows[:, i][:, None]
        dp[:, 1:] = dp[:, 1:] * (1.0 - qi) + dp[:, :-1] * qi
        dp[:, 0] *= 1.0 - q_rows[:, i]
    return dp


def conditional_weight_table(model: HiddenErrorModel) -> np.ndarray:
    """Conditional law of the error weight for every latent configuration.

    Returns an array of shape (S**n, n + 1); row ``j`` is the distribution
    of ``sum_i Y_i`` given the configuration with index ``j``.
    """
    count = _require_enumerable_states(model)
    out = np.empty((count, model.n + 1))
    row = 0
    for _, q_chunk in _enumerate_chunks(model):
        out[row : row + q_chunk.shape[0]] = _weight_dp(q_chunk)
        row += q_chunk.shape[0]
    return out


def weight_distribution(model: HiddenErrorModel) -> np.ndarray:
    """Exact law of the total error weight ``sum_i Y_i``, shape (n + 1,).

    A model whose sites are genuinely independent (every kernel row equal
    within each kernel, per-site channel) is resolved through a single
    sum-of-independent-bits recursion on the marginal rates, with no
    enumeration limit; all other models enumerate the latent space.
    """
    if isinstance(model.channel, PerSiteChannel) and _memoryless(model.field):
        return _weight_dp(site_error_rates(model)[None, :])[0]
    acc = np.zeros(model.n + 1)
    for p_chunk, q_chunk in _enumerate_chunks(model):
        acc += p_chunk @ _weight_dp(q_chunk)
    return acc


def _memoryless(spec: MarkovFieldSpec) -> bool:
    """True when every kernel's rows are identical, i.e. sites independent."""
    if spec.kernels.shape[0] == 0:
        return True
    return bool(np.all(spec.kernels == spec.kernels[:, :1, :]))
