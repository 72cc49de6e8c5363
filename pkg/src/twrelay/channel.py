"""Kronecker-correlated Rayleigh channels for the BS-RS-users link.

Both channels are drawn as ``R_rx^{1/2} G R_tx^{1/2}`` where ``G`` has i.i.d.
circular complex Gaussian entries with unit total variance and the
correlation matrices are exponential, ``[R]_ij = rho^|i-j|``.
"""

from dataclasses import dataclass

import numpy as np

from .numkernel import psd_sqrt

__all__ = [
    "InvalidCorrelationError",
    "CorrelationSpec",
    "ChannelSet",
    "correlation_matrix",
    "draw_channels",
    "trial_rng",
]


class InvalidCorrelationError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationSpec:
    rho_bs: float = 0.6172
    rho_rs: float = 0.5883
    rho_ms: float = 0.1

    def __post_init__(self):
        for name in ("rho_bs", "rho_rs", "rho_ms"):
            rho = getattr(self, name)
            if not 0.0 <= rho < 1.0:
                raise InvalidCorrelationError(f"{name}={rho} must lie in [0, 1)")


@dataclass(frozen=True)
class ChannelSet:
    h1: np.ndarray  # n_r x n_u, users -> RS
    h2: np.ndarray  # n_r x n_b, BS -> RS


def correlation_matrix(rho: float, n: int) -> np.ndarray:
    """Exponential correlation matrix with entries ``rho**|i-j|``."""
    if not 0.0 <= rho < 1.0:
        raise InvalidCorrelationError(f"rho={rho} must lie in [0, 1)")
    if n < 1:
        raise ValueError("n must be at least 1")
    idx = np.arange(n)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    # Unit total variance: each of real/imag has variance 1/2.
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channels(rng: np.random.Generator, config) -> ChannelSet:
    """Draw one correlated channel realization for ``config``.

    ``H1`` is drawn before ``H2`` from the same stream, so a given generator
    state always maps to the same pair.
    """
    corr = config.correlation
    r_rs = psd_sqrt(correlation_matrix(corr.rho_rs, config.n_r))
    r_ms = psd_sqrt(correlation_matrix(corr.rho_ms, config.n_u))
    r_bs = psd_sqrt(correlation_matrix(corr.rho_bs, config.n_b))
    g1 = _cn(rng, (config.n_r, config.n_u))
    g2 = _cn(rng, (config.n_r, config.n_b))
    return ChannelSet(h1=r_rs @ g1 @ r_ms, h2=r_rs @ g2 @ r_bs)


def trial_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream for the trial addressed by ``keys`` under ``master_seed``.

    Streams are split with ``SeedSequence(master_seed, spawn_key=keys)``, so a
    trial's channels depend only on the master seed and its own key tuple.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))
