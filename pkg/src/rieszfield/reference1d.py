"""Closed-form 1D covariances (fBm, fBs, fGn), the fractional-differencing
noise generator, and an exact Cholesky Gaussian sampler.

These serve as independent oracles for the field samplers and double as a
standalone 1D power-law noise source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import dft_1d


def fbm_covariance(s: float, t: float, hurst: float) -> float:
    """Fractional Brownian motion covariance (s^2H + t^2H - |t-s|^2H)/2."""
    _check_hurst(hurst)
    if s < 0 or t < 0:
        raise ValueError("fBm is indexed by non-negative time")
    return 0.5 * (s ** (2 * hurst) + t ** (2 * hurst) - abs(t - s) ** (2 * hurst))


def fbs_covariance(x, y, hurst: float) -> float:
    """Fractional Brownian surface covariance (|x|^2H + |y|^2H - |x-y|^2H)/2."""
    _check_hurst(hurst)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny, nxy = np.linalg.norm(x), np.linalg.norm(y), np.linalg.norm(x - y)
    return 0.5 * (nx ** (2 * hurst) + ny ** (2 * hurst) - nxy ** (2 * hurst))


def fgn_autocovariance(n: int, h: float, hurst: float) -> float:
    """Autocovariance of h-increments at lag n; h^2H at lag zero."""
    _check_hurst(hurst)
    if n < 0 or int(n) != n:
        raise ValueError("lag count must be a non-negative integer")
    if h <= 0:
        raise ValueError("increment must be positive")
    if n == 0:
        return h ** (2 * hurst)
    e = 2 * hurst
    return 0.5 * h ** e * ((n + 1) ** e + (n - 1) ** e - 2 * n ** e)


def _check_hurst(hurst):
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"Hurst parameter must lie in (0,1), got {hurst}")


@dataclass(frozen=True)
class HoskingSpec:
    """Fractional-differencing generator parameters: order beta = alpha/2,
    sample length a power of two."""

    beta: float
    length: int

    def __post_init__(self):
        if not 0.0 < self.beta <= 2.0:
            raise ValueError(f"beta must lie in (0,2], got {self.beta}")
        n = int(self.length)
        if n < 8 or n & (n - 1):
            raise ValueError(f"length must be a power of two >= 8, got {self.length}")


def hosking_impulse(beta: float, n: int) -> np.ndarray:
    """Impulse response of the fractional accumulator (1-z^{-1})^{-beta}.

    Binomial-series recurrence h_0 = 1, h_k = h_{k-1} (beta + k - 1)/k.
    """
    h = np.empty(n)
    h[0] = 1.0
    for k in range(1, n):
        h[k] = h[k - 1] * (beta + k - 1.0) / k
    return h


def hosking_filter(z, beta: float) -> np.ndarray:
    """Causal convolution of the impulse response with a driving sequence.

    Zero-padded double-length transforms keep the convolution exact;
    equals the direct O(N^2) sum to roundoff.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    h = hosking_impulse(beta, n)
    spec = dft_1d(np.concatenate([h, np.zeros(n)])) * dft_1d(np.concatenate([z, np.zeros(n)]))
    return np.real(dft_1d(spec, inverse=True))[:n]


def hosking_sample(spec: HoskingSpec, stream) -> np.ndarray:
    """Power-law noise series of length spec.length driven by the stream."""
    return hosking_filter(stream.normal(int(spec.length)), spec.beta)


def cholesky_sample(C, stream) -> np.ndarray:
    """Exact Gaussian draw with target covariance C (small jitter permitted).

    Retries once with diagonal jitter 1e-12 * trace/n before giving up on an
    indefinite matrix.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    try:
        R = np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(C) / n
        try:
            R = np.linalg.cholesky(C + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            raise ValueError("covariance is indefinite beyond jitter tolerance") from None
    return R @ stream.normal(n)
