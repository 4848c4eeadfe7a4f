"""Small dense complex linear algebra and overflow-safe thermal factors."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NotHermitian

HERMITIAN_RTOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a 2-D complex array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def hermiticity_residual(h: np.ndarray) -> float:
    """Relative Frobenius norm of the anti-Hermitian part, scaled by 1 + ||h||."""
    return float(np.linalg.norm(h - h.conj().T) / (1.0 + np.linalg.norm(h)))


def hermitianize(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + h.conj().T)


def check_hermitian(h, name: str = "matrix", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    h = as_matrix(h, name)
    if h.shape[0] != h.shape[1]:
        raise NotHermitian(f"{name} is not square: shape {h.shape}")
    res = hermiticity_residual(h)
    if res > rtol:
        raise NotHermitian(f"{name} is not Hermitian (relative residual {res:.3e})")
    return hermitianize(h)


class EighResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(h) -> EighResult:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The backend is LAPACK (via numpy); the input is symmetrized after the
    Hermiticity check so round-off asymmetry never reaches the solver.
    """
    h = check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return EighResult(w, v)


def nuclear_norm(a) -> float:
    """Sum of singular values of ``a``.

    This is also ``max Re Tr(A U)`` over unitaries ``U`` of matching size,
    attained at ``U = W V^dagger`` when ``A = V S W^dagger``.
    """
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def polar_unitary(a) -> np.ndarray:
    """Unitary factor ``U`` maximizing ``Re Tr(U^dagger A)``, i.e. ``A = U |A|``."""
    a = as_matrix(a)
    v, _, wh = np.linalg.svd(a)
    return v @ wh


def thermal_factors(x):
    """Return ``(1/(cosh x + 1), cosh x/(cosh x + 1))`` without overflow.

    Uses ``1/(cosh x+1) = 2e^{-x}/(1+e^{-x})^2`` and
    ``cosh x/(cosh x+1) = (1+e^{-2x})/(1+e^{-x})^2``; both are even in ``x``
    so ``|x|`` is used. Works elementwise on arrays.
    """
    x = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-x)
    denom = (1.0 + e) ** 2
    # clip the last-ulp overshoot near x = 0 back into the exact ranges
    inv_cosh_plus_one = np.minimum(2.0 * e / denom, 0.5)
    cosh_ratio = np.maximum((1.0 + e * e) / denom, 0.5)
    if inv_cosh_plus_one.ndim == 0:
        return float(inv_cosh_plus_one), float(cosh_ratio)
    return inv_cosh_plus_one, cosh_ratio


def cosh_minus_one_ratio(x):
    """``(cosh x - 1)/cosh x`` evaluated as ``(1-e^{-x})^2/(1+e^{-2x})``."""
    x = np.abs(np.asarray(x, dtype=float))
    # expm1 keeps the small-x end accurate: the ratio is x^2/2 + O(x^4)
    e = np.exp(-x)
    out = np.expm1(-x) ** 2 / (1.0 + e * e)
    return float(out) if out.ndim == 0 else out


def haar_unitaries(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    """Draw ``size`` Haar-random ``n x n`` unitaries, shape ``(size, n, n)``."""
    z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phases = d / np.abs(d)
    return q * phases[:, None, :]


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)
