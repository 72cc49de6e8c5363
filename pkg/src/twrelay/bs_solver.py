"""BS precoder design that needs no knowledge of the relay precoder.

The BS precoder only tries to raise and equalize the downlink eigenvalue
bounds ``lambda_max(P~_i^{-1} Q_i)``, which depend on ``W`` but not on
``Omega``. Starting from either a scaled identity or the whitened basis
``U Lambda^{-1/2}`` (whichever gives the larger harmonic mean of the
bounds), columns are repeatedly rescaled by ``psi_i = 1 / lambda_max(X_i^{-1} Q_i)``
with ``X_i = P~_i + Q_i`` and the result is renormalized to full BS power.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet
from .model import QuadraticForms, SystemConfig, build_rs_quadforms, effective_matrices
from .numkernel import generalized_max_eig, hermitian_eig

__all__ = [
    "SingularChannelError",
    "BsSolveResult",
    "whitening_basis",
    "downlink_forms",
    "downlink_bounds",
    "harmonic_mean",
    "initializer_select",
    "psi_update",
    "bs_iterate",
    "identity_precoder",
]

PSI_CAP = 1e6
SINGULAR_TOL = 1e-12


class SingularChannelError(np.linalg.LinAlgError):
    """``H2^H H2`` is numerically rank deficient."""


@dataclass(frozen=True)
class BsSolveResult:
    w: np.ndarray
    iters: int
    used_h0: bool
    lambda_history: list = field(default_factory=list)  # downlink bounds per iterate, initial first
    w_history: list = field(default_factory=list)


def whitening_basis(ch: ChannelSet) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``H2^H H2 = U diag(lam) U^H`` with ``lam`` ascending."""
    eig = hermitian_eig(ch.h2.conj().T @ ch.h2)
    lam = eig.eigenvalues
    if lam.max() <= 0 or lam.min() <= SINGULAR_TOL * lam.max():
        raise SingularChannelError("BS-RS channel is rank deficient")
    return eig.eigenvectors, lam


def identity_precoder(cfg: SystemConfig) -> np.ndarray:
    return np.sqrt(cfg.p_b / cfg.n_b) * np.eye(cfg.n_b, cfg.n_u, dtype=complex)


def downlink_forms(ch: ChannelSet, w, cfg: SystemConfig) -> QuadraticForms:
    return build_rs_quadforms(effective_matrices(ch, w, cfg), cfg)


def downlink_bounds(forms: QuadraticForms) -> np.ndarray:
    """``lambda_max(P~_i^{-1} Q_i)`` for the downlink streams."""
    return np.array(
        [generalized_max_eig(forms.q[i], forms.p_tilde[i])[0] for i in range(forms.n_u)]
    )


def harmonic_mean(values) -> float:
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        return 0.0
    return float(v.size / np.sum(1.0 / v))


def initializer_select(ch: ChannelSet, cfg: SystemConfig) -> tuple[np.ndarray, bool]:
    """Pick the starting precoder with the larger harmonic mean of downlink bounds.

    The identity candidate wins ties.
    """
    w_id = identity_precoder(cfg)
    u, lam = whitening_basis(ch)
    w_h0 = np.sqrt(cfg.p_b / np.sum(1.0 / lam)) * (u / np.sqrt(lam))
    a0 = harmonic_mean(downlink_bounds(downlink_forms(ch, w_id, cfg)))
    a1 = harmonic_mean(downlink_bounds(downlink_forms(ch, w_h0, cfg)))
    if a0 >= a1:
        return w_id, False
    return w_h0, True


def psi_update(forms: QuadraticForms) -> np.ndarray:
    """Per-user power factors ``psi_i = 1 / lambda_max(X_i^{-1} Q_i)``, ``X_i = P~_i + Q_i``.

    Streams with a vanishing signal get ``psi_i = 1e6``.
    """
    psi = np.empty(forms.n_u)
    for i in range(forms.n_u):
        lam, _ = generalized_max_eig(forms.q[i], forms.p_tilde[i] + forms.q[i])
        psi[i] = PSI_CAP if lam <= 1.0 / PSI_CAP else 1.0 / lam
    return psi


def _spread(lam: np.ndarray) -> float:
    if lam.min() <= 0:
        return np.inf
    return float(lam.max() / lam.min() - 1.0)


def bs_iterate(ch: ChannelSet, cfg: SystemConfig, tol: float = 0.1, max_iters: int = 50) -> BsSolveResult:
    """Iteratively equalize the downlink eigenvalue bounds.

    At least one update is always applied. Iteration stops once
    ``max(lambda) / min(lambda) - 1 <= tol`` over the downlink bounds, or
    after ``max_iters`` updates.
    """
    w, used_h0 = initializer_select(ch, cfg)
    forms = downlink_forms(ch, w, cfg)
    lam = downlink_bounds(forms)
    lam_hist, w_hist = [lam], [w]
    iters = 0
    while iters < max_iters:
        psi = psi_update(forms)
        w_new = w * psi[None, :]
        w = np.sqrt(cfg.p_b / np.real(np.trace(w_new.conj().T @ w_new))) * w_new
        iters += 1
        forms = downlink_forms(ch, w, cfg)
        lam = downlink_bounds(forms)
        lam_hist.append(lam)
        w_hist.append(w)
        if _spread(lam) <= tol:
            break
    return BsSolveResult(w=w, iters=iters, used_h0=used_h0, lambda_history=lam_hist, w_history=w_hist)
