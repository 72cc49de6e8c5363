"""Dense complex linear algebra shared by the channel, model and solver modules.

Matrices are plain ``numpy`` arrays. Every function here is pure and returns
fresh arrays.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "NotPSDError",
    "IllConditionedError",
    "HermitianEigResult",
    "as_matrix",
    "kron",
    "vec",
    "unvec",
    "hermitian_eig",
    "psd_sqrt",
    "inv_sqrt_pd",
    "generalized_max_eig",
]

PSD_REJECT = 1e-9
SINGULAR_RATIO = 1e-14


class DimensionError(ValueError):
    """Raised when matrix shapes are not compatible with an operation."""


class NotPSDError(ValueError):
    """Raised when a matrix expected to be PSD has a clearly negative eigenvalue."""


class IllConditionedError(np.linalg.LinAlgError):
    """Raised when a matrix that must be positive definite is numerically singular."""


@dataclass(frozen=True)
class HermitianEigResult:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # unitary, one eigenvector per column


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a 2-D complex array, rejecting empty or non-finite input."""
    m = np.array(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has NaN or Inf entries")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(a) -> np.ndarray:
    """Stack the columns of ``a`` into one vector (column-major order)."""
    return as_matrix(a).reshape(-1, order="F")


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    cols = rows if cols is None else cols
    v = np.asarray(v, dtype=complex)
    if v.size != rows * cols:
        raise DimensionError(f"cannot reshape {v.size} entries into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    # Rotate each column so its first non-negligible entry is real positive.
    mag = np.abs(vectors)
    scale = np.maximum(mag.max(axis=0), 1e-300)
    first = np.argmax(mag > 1e-12 * scale, axis=0)
    pivot = vectors[first, np.arange(vectors.shape[1])]
    phase = np.ones_like(pivot)
    nz = np.abs(pivot) > 0
    phase[nz] = np.abs(pivot[nz]) / pivot[nz]
    return vectors * phase[None, :]


def hermitian_eig(a) -> HermitianEigResult:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as ``(a + a^H)/2`` before decomposition. Eigenvalues
    are returned in ascending order and each eigenvector is rotated so that its
    first nonzero component is real and positive.

    Raises
    ------
    DimensionError
        If ``a`` is not square.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"hermitian_eig needs a square matrix, got {m.shape}")
    m = 0.5 * (m + m.conj().T)
    w, u = np.linalg.eigh(m)
    return HermitianEigResult(eigenvalues=w, eigenvectors=_fix_phase(u))


def psd_sqrt(a) -> np.ndarray:
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Eigenvalues down to ``-1e-9 * ||a||`` are treated as roundoff and clamped
    to zero; anything more negative raises :class:`NotPSDError`.
    """
    eig = hermitian_eig(a)
    scale = max(np.abs(eig.eigenvalues).max(), 1e-300)
    if eig.eigenvalues.min() < -PSD_REJECT * scale:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {eig.eigenvalues.min():.3e})")
    w = np.clip(eig.eigenvalues, 0.0, None)
    u = eig.eigenvectors
    root = (u * np.sqrt(w)) @ u.conj().T
    return 0.5 * (root + root.conj().T)


def inv_sqrt_pd(p) -> np.ndarray:
    """``p^{-1/2}`` for a Hermitian positive definite ``p``."""
    p = as_matrix(p)
    # Eigenvector phases cancel in U diag(.) U^H, so no phase convention here.
    w, u = np.linalg.eigh(0.5 * (p + p.conj().T))
    if w.max() <= 0 or w.min() <= SINGULAR_RATIO * w.max():
        raise IllConditionedError(
            f"matrix is not safely positive definite (eigenvalues in [{w.min():.3e}, {w.max():.3e}])"
        )
    return (u / np.sqrt(w)) @ u.conj().T


def generalized_max_eig(q, p) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of the pencil ``(q, p)``.

    Computes ``lambda_max(p^{-1/2} q p^{-1/2})`` and the back-transformed
    eigenvector ``v = p^{-1/2} u``, normalized to unit Euclidean norm.

    Raises
    ------
    IllConditionedError
        If ``p`` is singular or indefinite.
    """
    q = as_matrix(q)
    p_isqrt = inv_sqrt_pd(p)
    sym = p_isqrt @ q @ p_isqrt
    w, u = np.linalg.eigh(0.5 * (sym + sym.conj().T))
    lam = float(w[-1])
    v = p_isqrt @ u[:, -1]
    v = _fix_phase((v / np.linalg.norm(v))[:, None])[:, 0]
    return lam, v
