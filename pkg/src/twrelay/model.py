"""System model of the multiuser amplify-and-forward two-way relay.

Stream ordering everywhere in this package is the merged set: downlink
streams (BS -> user i) first, then uplink streams (user i -> BS antenna i).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelSet, CorrelationSpec
from .numkernel import DimensionError

__all__ = [
    "SystemConfig",
    "EffectiveMatrices",
    "QuadraticForms",
    "BsQuadraticForms",
    "effective_matrices",
    "sinr_direct",
    "build_rs_quadforms",
    "build_bs_quadforms",
    "quadform_sinr",
    "relay_power",
    "worst_user_rate",
    "rate_from_sinr",
]

DEFAULT_POWER = 10**1.5


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, power budgets and noise levels.

    Defaults: 3 BS antennas, 6 relay antennas, 3 users, all power budgets
    ``10**1.5`` and unit relay noise.
    """

    n_b: int = 3
    n_r: int = 6
    n_u: int = 3
    p_u: float = DEFAULT_POWER
    p_b: float = DEFAULT_POWER
    p_r: float = DEFAULT_POWER
    sigma_r: float = 1.0
    sigma: float = 1.0
    correlation: CorrelationSpec = field(default_factory=CorrelationSpec)

    def __post_init__(self):
        if not 1 <= self.n_u <= self.n_r:
            raise ValueError(f"need 1 <= n_u <= n_r, got n_u={self.n_u}, n_r={self.n_r}")
        if self.n_u != self.n_b:
            raise ValueError(f"n_u must equal n_b, got n_u={self.n_u}, n_b={self.n_b}")
        for name in ("p_u", "p_b", "p_r", "sigma_r", "sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def t1_gain(self) -> float:
        """Per-user amplitude, ``T1 = t1_gain * I``."""
        return float(np.sqrt(self.p_u / self.n_u))

    def with_sigma(self, sigma: float) -> "SystemConfig":
        return replace(self, sigma=sigma)


@dataclass(frozen=True)
class EffectiveMatrices:
    a: tuple  # (A1, A2) = (H1^T, H2^T)
    b: tuple  # (B1, B2) = (H2 W, H1 T1)
    c: tuple  # (C1, C2) = (H1 T1, 0)
    y: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class QuadraticForms:
    """Per-stream quadratic forms over ``omega = vec(Omega)``.

    ``q_vec[i]`` is the rank-one generator of ``q[i] = q_vec[i] q_vec[i]^H``.
    """

    q_vec: np.ndarray  # (2 n_u, n_r^2)
    q: np.ndarray  # (2 n_u, n_r^2, n_r^2)
    p: np.ndarray
    p_tilde: np.ndarray
    z: np.ndarray
    sigma_sq: float
    p_r: float
    n_u: int

    @property
    def n_streams(self) -> int:
        return self.q.shape[0]

    def downlink(self) -> slice:
        return slice(0, self.n_u)


@dataclass(frozen=True)
class BsQuadraticForms:
    f: np.ndarray  # H1^T Omega H2
    sigma_w_sq: np.ndarray
    d: np.ndarray  # (n_u, n_b n_u, n_b n_u)
    c: np.ndarray


def _check_shape(name, m, shape):
    if m.shape != shape:
        raise DimensionError(f"{name} has shape {m.shape}, expected {shape}")


def effective_matrices(ch: ChannelSet, w, cfg: SystemConfig) -> EffectiveMatrices:
    """Build ``A_k, B_k, C_k``, the relay input covariance ``Y`` and ``Z = Y^T (x) I``."""
    w = np.asarray(w, dtype=complex)
    _check_shape("h1", ch.h1, (cfg.n_r, cfg.n_u))
    _check_shape("h2", ch.h2, (cfg.n_r, cfg.n_b))
    _check_shape("w", w, (cfg.n_b, cfg.n_u))
    power = np.real(np.trace(w.conj().T @ w))
    if power > cfg.p_b * (1 + 1e-9):
        raise ValueError(f"BS precoder power {power} exceeds p_b={cfg.p_b}")

    h1, h2 = ch.h1, ch.h2
    c1 = cfg.t1_gain * h1
    b1 = h2 @ w
    y = b1 @ b1.conj().T + (cfg.p_u / cfg.n_u) * (h1 @ h1.conj().T) + cfg.sigma**2 * np.eye(cfg.n_r)
    y = 0.5 * (y + y.conj().T)
    z = np.kron(y.T, np.eye(cfg.n_r))
    return EffectiveMatrices(
        a=(h1.T, h2.T),
        b=(b1, c1),
        c=(c1, np.zeros((cfg.n_r, cfg.n_b), dtype=complex)),
        y=y,
        z=z,
    )


def sinr_direct(omega, eff: EffectiveMatrices, cfg: SystemConfig) -> np.ndarray:
    """Per-stream SINR evaluated from the received-signal expressions.

    Returns ``2 n_u`` values: downlink streams then uplink streams.
    """
    omega = np.asarray(omega, dtype=complex)
    _check_shape("omega", omega, (cfg.n_r, cfg.n_r))
    out = []
    for a, b, c in zip(eff.a, eff.b, eff.c):
        a_om = a @ omega
        g = a_om @ b
        k = a_om @ c
        signal = np.abs(np.diag(g)) ** 2
        interf = (np.abs(g) ** 2).sum(axis=1) - signal
        # Own back-propagated symbol (diagonal of k) is cancelled at the receiver.
        interf = interf + (np.abs(k) ** 2).sum(axis=1) - np.abs(np.diag(k)) ** 2
        noise = cfg.sigma_r**2 * (np.abs(a_om) ** 2).sum(axis=1) + cfg.sigma**2
        out.append(signal / (interf + noise))
    return np.concatenate(out)


def build_rs_quadforms(eff: EffectiveMatrices, cfg: SystemConfig) -> QuadraticForms:
    n = cfg.n_r**2
    eye_r = np.eye(cfg.n_r)
    q_vecs, qs, ps = [], [], []
    for a, b, c in zip(eff.a, eff.b, eff.c):
        n_streams = a.shape[0]
        for i in range(n_streams):
            a_i = a[i, :]
            p_i = cfg.sigma_r**2 * np.kron(eye_r, np.outer(a_i.conj(), a_i))
            q_ii = None
            for j in range(b.shape[1]):
                q_ij = np.outer(b[:, j], a_i).ravel().conj()
                if j == i:
                    q_ii = q_ij
                    continue
                p_i = p_i + np.outer(q_ij, q_ij.conj())
                s_ij = np.outer(c[:, j], a_i).ravel().conj()
                p_i = p_i + np.outer(s_ij, s_ij.conj())
            q_vecs.append(q_ii)
            qs.append(np.outer(q_ii, q_ii.conj()))
            ps.append(0.5 * (p_i + p_i.conj().T))
    p = np.array(ps).reshape(-1, n, n)
    sigma_sq = cfg.sigma**2
    return QuadraticForms(
        q_vec=np.array(q_vecs),
        q=np.array(qs),
        p=p,
        p_tilde=p + (sigma_sq / cfg.p_r) * eff.z[None, :, :],
        z=eff.z,
        sigma_sq=sigma_sq,
        p_r=cfg.p_r,
        n_u=cfg.n_u,
    )


def quadform_sinr(omega_vec, forms: QuadraticForms) -> np.ndarray:
    """``w^H Q_i w / (w^H P_i w + sigma^2)`` for every stream."""
    w = np.asarray(omega_vec, dtype=complex)
    num = np.abs(forms.q_vec.conj() @ w) ** 2
    den = np.real(np.einsum("j,ijk,k->i", w.conj(), forms.p, w)) + forms.sigma_sq
    return num / den


def relay_power(omega_vec, z) -> float:
    w = np.asarray(omega_vec, dtype=complex)
    return float(np.real(w.conj() @ z @ w))


def build_bs_quadforms(omega, ch: ChannelSet, cfg: SystemConfig) -> BsQuadraticForms:
    """Quadratic forms of the downlink SINRs in ``theta = vec(W)`` for fixed ``omega``."""
    omega = np.asarray(omega, dtype=complex)
    _check_shape("omega", omega, (cfg.n_r, cfg.n_r))
    a_om = ch.h1.T @ omega
    f = a_om @ ch.h2
    g = a_om @ (cfg.t1_gain * ch.h1)
    interf = (np.abs(g) ** 2).sum(axis=1) - np.abs(np.diag(g)) ** 2
    sigma_w_sq = interf + cfg.sigma_r**2 * (np.abs(a_om) ** 2).sum(axis=1) + cfg.sigma**2

    eye_u = np.eye(cfg.n_u)
    d, c = [], []
    for i in range(cfg.n_u):
        f_tilde = np.outer(f[i, :].conj(), f[i, :])
        c.append(np.kron(np.diag(eye_u[i]), f_tilde))
        d.append(np.kron(np.diag(1.0 - eye_u[i]), f_tilde))
    return BsQuadraticForms(f=f, sigma_w_sq=sigma_w_sq, d=np.array(d), c=np.array(c))


def rate_from_sinr(gamma, half_duplex: bool = True):
    factor = 0.5 if half_duplex else 1.0
    return factor * np.log2(1.0 + np.asarray(gamma, dtype=float))


def worst_user_rate(gammas, half_duplex: bool = True) -> float:
    """Rate of the weakest stream in bits/s/Hz.

    The two-hop half-duplex protocol halves the rate; pass
    ``half_duplex=False`` for the plain ``log2(1 + gamma)``.
    """
    g = np.asarray(gammas, dtype=float)
    if g.size == 0:
        raise ValueError("worst_user_rate needs at least one SINR value")
    if np.any(g < 0):
        raise ValueError("SINR values must be nonnegative")
    return float(rate_from_sinr(g.min(), half_duplex))
