"""Deterministic random streams built on counter-based Philox generators.

Every stochastic consumer (simulated readers, bootstrap replicates, coverage
replicates) owns a stream keyed by (seed, kind, index), so results never
depend on execution order or thread count. Variates are produced by inverting
uniforms: the normal through the package's inverse CDF, the binomial through a
mode-anchored CDF walk.
"""

from __future__ import annotations

import math

import numpy as np

from .quantiles import normal_quantile

_MASK64 = (1 << 64) - 1

# Stream namespaces; keep values stable, they are part of the determinism contract.
KIND_READER = 0
KIND_BOOTSTRAP = 1
KIND_COVERAGE = 2


def splitmix64(x: int) -> int:
    """One splitmix64 scramble step (pure 64-bit integer arithmetic)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """A 64-bit child seed for (seed, index), stable across platforms."""
    return splitmix64((seed ^ splitmix64(index & _MASK64)) & _MASK64)


def stream(seed: int, kind: int, index: int) -> np.random.Generator:
    """Independent generator for the given namespace and index."""
    key = np.array([derive_seed(seed, kind), index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_open(gen: np.random.Generator) -> float:
    """One uniform clipped into the open interval, safe for inverse CDFs."""
    u = float(gen.random())
    return min(max(u, 1e-16), 1.0 - 1e-16)


def normal_from(gen: np.random.Generator, mean: float = 0.0, sd: float = 1.0) -> float:
    return mean + sd * normal_quantile(uniform_open(gen))


def binomial_inverse(u: float, n: int, p: float) -> int:
    """Smallest k with Binomial(n, p) CDF(k) >= u, by a walk from the mode.

    Starting at the mode keeps the walk short (a few standard deviations) and
    avoids the underflow of pmf(0) for large n.
    """
    if not 0.0 < p < 1.0:
        if p <= 0.0:
            return 0
        return n
    if u <= 0.0:
        return 0
    if u >= 1.0:
        return n
    mode = int(math.floor((n + 1) * p))
    mode = min(max(mode, 0), n)
    log_pmf_mode = (
        math.lgamma(n + 1) - math.lgamma(mode + 1) - math.lgamma(n - mode + 1)
        + mode * math.log(p) + (n - mode) * math.log1p(-p)
    )
    pmf_mode = math.exp(log_pmf_mode)
    # CDF at the mode, accumulating downward until terms vanish.
    cdf_mode = pmf_mode
    pmf = pmf_mode
    j = mode
    while j > 0:
        pmf *= (j * (1.0 - p)) / ((n - j + 1) * p)
        cdf_mode += pmf
        j -= 1
        if pmf < cdf_mode * 1e-18:
            break
    if u <= cdf_mode:
        # walk down from the mode
        cdf = cdf_mode
        pmf = pmf_mode
        k = mode
        while k > 0 and u <= cdf - pmf:
            cdf -= pmf
            pmf *= (k * (1.0 - p)) / ((n - k + 1) * p)
            k -= 1
        return k
    # Above the mode, invert the survival function: CDF(k) >= u is
    # S(k) = sum_{j>k} pmf(j) <= 1-u. Suffix sums of the ascending tail keep
    # full relative precision where a forward CDF accumulation plateaus.
    v = 1.0 - u
    tail = []  # pmf(mode+1), pmf(mode+2), ...
    pmf = pmf_mode
    k = mode
    while k < n:
        pmf *= ((n - k) * p) / ((k + 1) * (1.0 - p))
        k += 1
        tail.append(pmf)
        if pmf == 0.0 or (pmf < v * 1e-9 and pmf < pmf_mode):
            break
    survival = 0.0
    cut = len(tail)  # smallest offset with S(mode+offset) <= v
    for i in range(len(tail) - 1, -1, -1):
        survival += tail[i]
        if survival > v:
            break
        cut = i
    return min(mode + cut, n)


def binomial_from(gen: np.random.Generator, n: int, p: float) -> int:
    return binomial_inverse(uniform_open(gen), n, p)
