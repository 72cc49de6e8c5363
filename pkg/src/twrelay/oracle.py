"""Brute-force baselines for small relay instances.

These stand in for a convex-solver reference: random search over
power-normalized relay precoders and, for a single relay antenna, an
exhaustive grid over the precoder magnitude.
"""

from dataclasses import dataclass

import numpy as np

from .model import QuadraticForms

__all__ = ["OracleReport", "UnsupportedDimensionError", "random_search_rs", "grid_search_scalar"]

BLOCK = 1 << 16


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class OracleReport:
    best_gamma: float
    best_omega: np.ndarray
    samples: int
    seed: int | None


def _min_sinr_batch(ws: np.ndarray, forms: QuadraticForms) -> np.ndarray:
    # ws: (batch, n). SINR numerators and denominators for every stream at once.
    num = np.abs(ws @ forms.q_vec.conj().T) ** 2
    den = np.einsum("bj,ijk,bk->bi", ws.conj(), forms.p, ws).real + forms.sigma_sq
    return (num / den).min(axis=1)


def random_search_rs(forms: QuadraticForms, samples: int, seed: int = 0) -> OracleReport:
    """Best min-SINR over ``samples`` random full-power relay precoders.

    Samples are generated in fixed blocks of 65536, block ``b`` drawing from
    ``SeedSequence(seed, spawn_key=(b,))``, so the result depends only on
    ``seed`` and ``samples``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n = forms.z.shape[0]
    best_gamma, best_w = -np.inf, None
    for b, start in enumerate(range(0, samples, BLOCK)):
        size = min(BLOCK, samples - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        ws = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
        power = np.einsum("bj,jk,bk->b", ws.conj(), forms.z, ws).real
        ws *= np.sqrt(forms.p_r / power)[:, None]
        gammas = _min_sinr_batch(ws, forms)
        k = int(np.argmax(gammas))
        if gammas[k] > best_gamma:
            best_gamma, best_w = float(gammas[k]), ws[k].copy()
    return OracleReport(best_gamma=best_gamma, best_omega=best_w, samples=samples, seed=seed)


def grid_search_scalar(forms: QuadraticForms, grid: int = 10001) -> OracleReport:
    """Exhaustive magnitude grid for a single-antenna relay.

    With one relay antenna the phase of ``omega`` does not matter, so the grid
    covers ``|omega|`` in ``[0, sqrt(P_R / Z)]``.
    """
    if forms.z.shape != (1, 1):
        raise UnsupportedDimensionError("grid search needs a single relay antenna")
    if grid < 2:
        raise ValueError("grid needs at least two points")
    z = float(forms.z[0, 0].real)
    mags = np.linspace(0.0, np.sqrt(forms.p_r / z), grid).astype(complex)
    gammas = _min_sinr_batch(mags[:, None], forms)
    k = int(np.argmax(gammas))
    return OracleReport(best_gamma=float(gammas[k]), best_omega=mags[k : k + 1], samples=grid, seed=None)
