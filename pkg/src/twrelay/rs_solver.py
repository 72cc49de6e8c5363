"""Max-min SINR relay precoding by Levenberg-Marquardt inside a bisection.

For a target ``gamma`` the relay looks for ``omega`` on the power sphere
``omega^H Z omega = P_R`` solving the polynomial system

    r_i(omega) = omega^H Q_i omega - gamma * omega^H P~_i omega = 0,

with ``P~_i = P_i + (sigma^2 / P_R) Z``. On the power sphere ``r_i >= 0`` is
exactly ``SINR_i >= gamma``, so a root certifies that ``gamma`` is
achievable. The bisection runs over ``[0, gamma_hat]`` where ``gamma_hat``
is the minimax eigenvalue bound, and the bound's maximizing eigenvector
seeds the first LM run.
"""

from dataclasses import dataclass

import numpy as np

from .model import EffectiveMatrices, QuadraticForms, SystemConfig, quadform_sinr, sinr_direct
from .numkernel import generalized_max_eig, unvec

__all__ = [
    "LmParams",
    "RsSolveResult",
    "minimax_bound",
    "normalize_power",
    "lm_residuals",
    "lm_solve",
    "bisection_solve",
]

FEASIBILITY_SLACK = 1e-6


@dataclass(frozen=True)
class LmParams:
    """Levenberg-Marquardt settings.

    ``damping_init`` is relative: the first damping value is
    ``damping_init * max_i ||grad r_i||^2``. ``residual_tol`` bounds the
    per-stream SINR error ``|r_i| / omega^H P~_i omega``; ``step_tol`` bounds
    the step norm relative to ``||omega||``. A run is abandoned as stalled when
    the last ``stall_window`` accepted steps reduced the squared residual by
    less than a factor ``stall_ratio`` (``stall_window=0`` disables this).
    """

    max_iters: int = 200
    damping_init: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 0.1
    residual_tol: float = 1e-8
    step_tol: float = 1e-12
    stall_window: int = 10
    stall_ratio: float = 0.95

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.stall_window < 0 or not 0.0 < self.stall_ratio <= 1.0:
            raise ValueError("need stall_window >= 0 and 0 < stall_ratio <= 1")
        if min(self.damping_init, self.residual_tol, self.step_tol) <= 0:
            raise ValueError("damping_init, residual_tol and step_tol must be positive")
        if not self.damping_up > 1.0 > self.damping_down > 0.0:
            raise ValueError("need damping_up > 1 > damping_down > 0")


@dataclass(frozen=True)
class RsSolveResult:
    omega: np.ndarray
    gamma_star: float
    gamma_hat: float
    bisection_iters: int
    lm_iters_total: int
    per_stream_sinr: np.ndarray


def normalize_power(omega_vec, forms: QuadraticForms) -> np.ndarray:
    """Rescale ``omega`` so that ``omega^H Z omega = P_R``."""
    w = np.asarray(omega_vec, dtype=complex)
    power = np.real(w.conj() @ forms.z @ w)
    if not power > 0:
        raise ValueError("cannot normalize a zero relay precoder")
    return w * np.sqrt(forms.p_r / power)


def minimax_bound(forms: QuadraticForms) -> tuple[float, np.ndarray]:
    """Minimax upper bound on the achievable max-min SINR.

    Returns ``gamma_hat = min_i lambda_max(P~_i^{-1} Q_i)`` and the
    power-normalized top generalized eigenvector of the stream attaining the
    minimum (lowest index on ties).
    """
    best_lam, best_v = np.inf, None
    for i in range(forms.n_streams):
        lam, v = generalized_max_eig(forms.q[i], forms.p_tilde[i])
        if lam < best_lam:
            best_lam, best_v = lam, v
    return max(best_lam, 0.0), normalize_power(best_v, forms)


def lm_residuals(omega_vec, gamma: float, forms: QuadraticForms) -> np.ndarray:
    """``omega^H Q_i omega - gamma * omega^H P~_i omega`` for every stream."""
    w = np.asarray(omega_vec, dtype=complex)
    signal = np.abs(forms.q_vec.conj() @ w) ** 2
    return signal - gamma * np.real(np.einsum("j,ijk,k->i", w.conj(), forms.p_tilde, w))


def _sinr_errors(w, gamma, q_conj, p_tilde):
    qw = q_conj @ w
    ptw = p_tilde @ w
    den = (ptw @ w.conj()).real
    return (qw.real**2 + qw.imag**2) / den - gamma, den, qw, ptw


def lm_solve(
    omega0,
    gamma: float,
    forms: QuadraticForms,
    params: LmParams | None = None,
    stop_when_feasible: bool = False,
):
    """Damped Gauss-Newton on the stacked real and imaginary parts of ``omega``.

    The iteration runs on the residuals divided by ``omega^H P~_i omega``,
    i.e. on ``SINR_i(omega) - gamma`` over the power sphere. This has the same
    roots as :func:`lm_residuals` but is scale invariant and balanced across
    streams. Every iterate is rescaled to full relay power.

    With ``stop_when_feasible`` the iteration also stops (reporting
    convergence) as soon as every stream reaches ``gamma``; the bisection uses
    this because it only needs a certificate, not an equalized point.

    Returns ``(omega, converged, iters)``; running out of iterations is
    reported through ``converged=False``.
    """
    params = params or LmParams()
    q_conj, p_tilde, z, p_r = forms.q_vec.conj(), forms.p_tilde, forms.z, forms.p_r

    def project(v):
        return v * np.sqrt(p_r / (v.conj() @ (z @ v)).real)

    w = normalize_power(omega0, forms)
    n = w.size
    e, den, qw, ptw = _sinr_errors(w, gamma, q_conj, p_tilde)
    cost = e @ e
    history = [cost]
    mu = None
    iters = 0
    while iters < params.max_iters:
        k = params.stall_window
        if k and len(history) > k and history[-1] > params.stall_ratio * history[-1 - k]:
            break
        if np.abs(e).max() <= params.residual_tol or (stop_when_feasible and e.min() >= 0):
            return w, True, iters
        iters += 1
        # d/d(Re w, Im w) of w^H M w is 2 (Re, Im) of M w; here
        # M_i = (Q_i - rho_i P~_i) / (w^H P~_i w) with rho_i the current SINR.
        rho = e + gamma
        mw = (q_conj.conj() * qw[:, None] - rho[:, None] * ptw) / den[:, None]
        jac = 2.0 * np.concatenate([mw.real, mw.imag], axis=1)
        # (J^T J + mu I)^{-1} J^T e = J^T (J J^T + mu I)^{-1} e; one small
        # eigendecomposition serves every damping retry.
        s, v = np.linalg.eigh(jac @ jac.T)
        ve = v.T @ e
        if mu is None:
            mu = params.damping_init * max(s[-1], 1e-300)
        w_scale = np.sqrt((w.conj() @ w).real)
        while True:
            step = -jac.T @ (v @ (ve / (s + mu)))
            step_norm = np.sqrt(step @ step)
            trial = project(w + step[:n] + 1j * step[n:])
            e_t, den_t, qw_t, ptw_t = _sinr_errors(trial, gamma, q_conj, p_tilde)
            cost_t = e_t @ e_t
            if cost_t < cost:
                w, e, den, qw, ptw, cost = trial, e_t, den_t, qw_t, ptw_t, cost_t
                history.append(cost)
                mu *= params.damping_down
                break
            mu *= params.damping_up
            if step_norm <= params.step_tol * w_scale:
                return w, True, iters
        if step_norm <= params.step_tol * w_scale:
            return w, True, iters
    return w, bool(np.abs(e).max() <= params.residual_tol), iters


def bisection_solve(
    forms: QuadraticForms,
    params: LmParams | None = None,
    bis_tol: float = 1e-3,
    *,
    eff: EffectiveMatrices | None = None,
    cfg: SystemConfig | None = None,
    warm_start: bool = True,
    max_steps: int = 40,
) -> RsSolveResult:
    """Largest SINR target certified by LM over ``[0, gamma_hat]``.

    A target is accepted when the LM iterate, rescaled to full relay power,
    reaches it on every stream (within a ``1e-6`` relative slack). When
    ``eff`` and ``cfg`` are given, SINRs are evaluated from the signal model
    directly rather than through the quadratic forms.

    Every LM iterate returned is itself a feasible point for its own
    min-SINR, so the best one seen raises the lower end of the bracket even
    when LM did not converge. With ``warm_start`` each LM run starts from that
    best precoder; otherwise every run restarts from the bound's eigenvector.
    """
    params = params or LmParams()
    n_r = int(round(np.sqrt(forms.z.shape[0])))

    def sinrs(w):
        if eff is not None and cfg is not None:
            return sinr_direct(unvec(w, n_r), eff, cfg)
        return quadform_sinr(w, forms)

    gamma_hat, w0 = minimax_bound(forms)
    best_w = w0
    best_s = sinrs(w0)
    lo, hi = float(best_s.min()), gamma_hat
    steps = lm_total = 0
    while hi - lo > bis_tol * gamma_hat and steps < max_steps:
        mid = 0.5 * (lo + hi)
        start = best_w if warm_start else w0
        w, converged, iters = lm_solve(start, mid, forms, params, stop_when_feasible=True)
        steps += 1
        lm_total += iters
        s = sinrs(w)
        achieved = float(s.min())
        # Any iterate is a feasible point for its own min-SINR, converged or not.
        if achieved > best_s.min():
            best_w, best_s = w, s
            lo = max(lo, achieved)
        if not ((converged and achieved >= mid * (1 - FEASIBILITY_SLACK)) or achieved >= mid):
            hi = mid
    return RsSolveResult(
        omega=unvec(best_w, n_r),
        gamma_star=float(best_s.min()),
        gamma_hat=float(gamma_hat),
        bisection_iters=steps,
        lm_iters_total=lm_total,
        per_stream_sinr=best_s,
    )
