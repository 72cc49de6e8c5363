import numpy as np
import pytest

from twrelay.channel import ChannelSet, CorrelationSpec, draw_channels, trial_rng
from twrelay.model import SystemConfig, build_rs_quadforms, effective_matrices


def scalar_config(**kw) -> SystemConfig:
    """All dimensions 1, unit powers and noise."""
    base = dict(n_b=1, n_r=1, n_u=1, p_u=1.0, p_b=1.0, p_r=1.0, sigma_r=1.0, sigma=1.0)
    base.update(kw)
    return SystemConfig(**base)


def scalar_channels() -> ChannelSet:
    return ChannelSet(h1=np.ones((1, 1), complex), h2=np.ones((1, 1), complex))


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_w(rng, cfg: SystemConfig, fraction: float = 1.0) -> np.ndarray:
    w = crandn(rng, cfg.n_b, cfg.n_u)
    return w * np.sqrt(fraction * cfg.p_b / np.real(np.trace(w.conj().T @ w)))


def random_instance(seed: int, cfg: SystemConfig | None = None, sigma: float | None = None):
    """Channels, random full-power W, effective matrices and forms for one seed."""
    cfg = cfg or SystemConfig()
    if sigma is not None:
        cfg = cfg.with_sigma(sigma)
    rng = trial_rng(12345, seed)
    ch = draw_channels(rng, cfg)
    w = random_w(rng, cfg)
    eff = effective_matrices(ch, w, cfg)
    return cfg, ch, w, eff, build_rs_quadforms(eff, cfg)


@pytest.fixture
def scalar_system():
    cfg = scalar_config()
    ch = scalar_channels()
    eff = effective_matrices(ch, np.ones((1, 1)), cfg)
    return cfg, ch, eff, build_rs_quadforms(eff, cfg)


@pytest.fixture
def uncorrelated():
    return CorrelationSpec(0.0, 0.0, 0.0)
