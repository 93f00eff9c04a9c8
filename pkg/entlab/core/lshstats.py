"""Cosine-distance LSH encoding, distance metrics and likelihood math.

Likelihood functions work in log space and report information in bits.
Binomial coefficients are exact integers for n <= 64 and log-gamma above.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import entr, gammaln, xlog1py, xlogy

from entlab.core.constants import EXACT_BINOMIAL_MAX_N
from entlab.core.errors import (
    DimensionError,
    LikelihoodDomainError,
    ZeroVectorError,
)
from entlab.core.rngcore import derive_stream

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class BinomialModel:
    """Bin(n, theta)."""

    n: int
    theta: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise LikelihoodDomainError(f"n must be at least 1, got {self.n}")
        if not 0.0 <= self.theta <= 1.0:
            raise LikelihoodDomainError(f"theta must lie in [0, 1], got {self.theta}")

    def check_count(self, k: int) -> None:
        if not 0 <= k <= self.n:
            raise LikelihoodDomainError(f"k must lie in [0, {self.n}], got {k}")


class NllDecomposition(NamedTuple):
    """Monte-Carlo and exact expected negative log-likelihood, in bits."""

    empirical: float
    analytic: float
    kl: float
    entropy: float
    stderr: float


def as_vector(values: np.ndarray, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    vector = np.asarray(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(vector)):
        raise DimensionError(f"{name} has non-finite entries")
    return vector


def require_nonzero(vector: np.ndarray, name: str = "vector") -> None:
    if not np.any(vector):
        raise ZeroVectorError(f"{name} must be nonzero")


def encode_lsh(w: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Project ``w`` through the hash vectors (rows of ``G``): ``c = G w``."""
    w = as_vector(w, "w")
    if G.ndim != 2 or G.shape[1] != w.size:
        raise DimensionError(
            f"matrix with shape {G.shape} cannot encode a vector of dimension {w.size}"
        )
    require_nonzero(w, "w")
    return G @ w


def sign_quantize(c: np.ndarray) -> np.ndarray:
    """Bit i is 1 when c_i >= 0 (sgn(0) is +1), else 0."""
    return (np.asarray(c) >= 0).astype(np.uint8)


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    """Number of positions where two bit vectors differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))


def angle_theta(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between ``u`` and ``v`` as a fraction of pi, in [0, 1].

    Evaluated as ``2 atan2(|u^ - v^|, |u^ + v^|) / pi``, which equals
    ``arccos(<u^, v^>) / pi`` and needs no clamping.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.size != v.size:
        raise DimensionError(f"dimension mismatch: {u.size} vs {v.size}")
    require_nonzero(u, "u")
    require_nonzero(v, "v")
    u_hat = u / np.linalg.norm(u)
    v_hat = v / np.linalg.norm(v)
    half = math.atan2(np.linalg.norm(u_hat - v_hat), np.linalg.norm(u_hat + v_hat))
    return 2.0 * half / math.pi


def collision_probability(u: np.ndarray, v: np.ndarray) -> float:
    """Probability that one random hyperplane puts u and v on the same side."""
    return 1.0 - angle_theta(u, v)


def log_binomial_coefficient(n: int, k: int) -> float:
    """Natural log of C(n, k)."""
    if not 0 <= k <= n:
        raise LikelihoodDomainError(f"k must lie in [0, {n}], got {k}")
    if n <= EXACT_BINOMIAL_MAX_N:
        return math.log(math.comb(n, k))
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _log_sequence(n: int, k: int, theta: float) -> float:
    return float(xlogy(k, theta) + xlog1py(n - k, -theta))


def log2_sequence_likelihood(model: BinomialModel, k: int) -> float:
    """log2 of theta^k (1 - theta)^(n - k); -inf when impossible."""
    model.check_count(k)
    return _log_sequence(model.n, k, model.theta) / _LN2


def bernoulli_seq_likelihood(model: BinomialModel, k: int) -> float:
    """Likelihood of one particular sequence with k successes."""
    model.check_count(k)
    return math.exp(_log_sequence(model.n, k, model.theta))


def binomial_pmf(model: BinomialModel, k: int) -> float:
    """P(x = k) under Bin(n, theta)."""
    model.check_count(k)
    log_p = log_binomial_coefficient(model.n, k) + _log_sequence(model.n, k, model.theta)
    return math.exp(log_p)


def _log_pmf_vector(n: int, theta: float) -> np.ndarray:
    ks = np.arange(n + 1)
    log_coeff = np.array([log_binomial_coefficient(n, int(k)) for k in ks])
    return log_coeff + xlogy(ks, theta) + xlog1py(n - ks, -theta)


def binomial_pmf_table(model: BinomialModel) -> np.ndarray:
    """PMF values for k = 0..n."""
    return np.exp(_log_pmf_vector(model.n, model.theta))


def density_ratio(n: int, k: int, theta0: float, theta: float) -> float:
    """f(x, k; theta0) / f(x, k; theta), equal to C(n, k) when theta == theta0."""
    model0 = BinomialModel(n, theta0)
    model = BinomialModel(n, theta)
    model.check_count(k)
    log_den = _log_sequence(n, k, model.theta)
    if math.isinf(log_den):
        raise LikelihoodDomainError(
            f"sequence likelihood is zero at theta={theta}, k={k}: ratio undefined"
        )
    if theta0 == theta:
        if n <= EXACT_BINOMIAL_MAX_N:
            return float(math.comb(n, k))
        return math.exp(log_binomial_coefficient(n, k))
    log_num = log_binomial_coefficient(n, k) + _log_sequence(n, k, model0.theta)
    return math.exp(log_num - log_den)


def mle_theta(n: int, k: int) -> float:
    """Maximum-likelihood success probability k / n."""
    if n < 1:
        raise LikelihoodDomainError(f"n must be at least 1, got {n}")
    if not 0 <= k <= n:
        raise LikelihoodDomainError(f"k must lie in [0, {n}], got {k}")
    return k / n


def binary_entropy(p: float) -> float:
    """H2(p) in bits with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise LikelihoodDomainError(f"p must lie in [0, 1], got {p}")
    return float((entr(p) + entr(1.0 - p)) / _LN2)


def min_nll(n: int, k: int) -> float:
    """Minimum negative log2-likelihood, n H2(k / n)."""
    return n * binary_entropy(mle_theta(n, k))


def binomial_entropy(model: BinomialModel) -> float:
    """Shannon entropy of Bin(n, theta) in bits."""
    return float(np.sum(entr(binomial_pmf_table(model))) / _LN2)


def kl_divergence(n: int, theta0: float, theta: float) -> float:
    """D_KL(Bin(n, theta0) || Bin(n, theta)) in bits, by exact summation."""
    log_p = _log_pmf_vector(n, theta0)
    log_q = _log_pmf_vector(n, theta)
    p = np.exp(log_p)
    support = p > 0
    return float(np.sum(p[support] * (log_p[support] - log_q[support])) / _LN2)


def nll_decomposition_check(
    n: int, theta0: float, theta: float, N: int, seed: int
) -> NllDecomposition:
    """Compare Monte-Carlo expected -log2 f(x; theta) with KL + entropy.

    Samples ``x ~ Bin(n, theta0)`` by inverse-CDF lookup on the seeded
    uniform stream; the gap shrinks like O(1 / sqrt(N)).
    """
    for name, value in (("theta0", theta0), ("theta", theta)):
        if not 0.0 < value < 1.0:
            raise LikelihoodDomainError(f"{name} must lie in (0, 1), got {value}")
    if N < 1:
        raise LikelihoodDomainError(f"N must be at least 1, got {N}")
    model0 = BinomialModel(n, theta0)

    cdf = np.cumsum(binomial_pmf_table(model0))
    uniforms = derive_stream(seed, 0).uniforms(N)
    samples = np.minimum(np.searchsorted(cdf, uniforms, side="left"), n)

    nll_bits = -_log_pmf_vector(n, theta)[samples] / _LN2
    entropy = binomial_entropy(model0)
    kl = kl_divergence(n, theta0, theta)
    stderr = float(np.std(nll_bits, ddof=1) / math.sqrt(N)) if N > 1 else 0.0
    return NllDecomposition(
        empirical=float(np.mean(nll_bits)),
        analytic=kl + entropy,
        kl=kl,
        entropy=entropy,
        stderr=stderr,
    )
