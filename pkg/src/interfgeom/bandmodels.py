"""Two-band Bloch Hamiltonians ``h(k; M) = d(k; M) . sigma`` and their Fock-space lift."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import numerics
from .errors import GaplessPoint

DEFAULT_EPS_GAP = 1e-12
FD_STEP = 1e-6

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

DVector = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class TwoBandModel:
    """A family of Bloch vectors ``d(k; M)``.

    ``d_vector`` and ``d_vector_dM`` take momenta of shape ``(..., spatial_dim)``
    and return arrays of shape ``(..., 3)``. Without an analytic parameter
    derivative, a central difference with step ``FD_STEP`` is used.
    """

    name: str
    spatial_dim: int
    d_vector: DVector
    d_vector_dM: DVector | None = None

    def __post_init__(self):
        if self.spatial_dim not in (1, 2, 3):
            raise ValueError("spatial_dim must be 1, 2 or 3")

    def d(self, k, M: float) -> np.ndarray:
        return self.d_vector(self._momenta(k), M)

    def dd_dM(self, k, M: float) -> np.ndarray:
        k = self._momenta(k)
        if self.d_vector_dM is not None:
            return np.broadcast_to(self.d_vector_dM(k, M), k.shape[:-1] + (3,))
        return (self.d_vector(k, M + FD_STEP) - self.d_vector(k, M - FD_STEP)) / (2 * FD_STEP)

    def hamiltonian(self, k, M: float) -> np.ndarray:
        """Bloch Hamiltonian ``d . sigma``; stacks over leading momentum axes."""
        return bloch_hamiltonian(self.d(k, M))

    def _momenta(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if k.ndim == 0 or k.shape[-1] != self.spatial_dim:
            raise ValueError(f"momenta must have trailing axis {self.spatial_dim}, got {k.shape}")
        return k


def bloch_hamiltonian(d) -> np.ndarray:
    return np.einsum("...m,mab->...ab", np.asarray(d, dtype=float), PAULI)


def _dirac_d(k, M):
    kx, ky = k[..., 0], k[..., 1]
    return np.stack([np.sin(kx), np.sin(ky), M - np.cos(kx) - np.cos(ky)], axis=-1)


def _dirac_dd(k, M):
    return np.array([0.0, 0.0, 1.0])


def dirac_model() -> TwoBandModel:
    """Massive Dirac (Chern insulator) model on the square lattice."""
    return TwoBandModel("dirac", 2, _dirac_d, _dirac_dd)


BUILTIN_MODELS: dict[str, Callable[[], TwoBandModel]] = {"dirac": dirac_model}


def get_model(name: str) -> TwoBandModel:
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; built-ins: {sorted(BUILTIN_MODELS)}") from None


@dataclass(frozen=True)
class BlochPoint:
    """Energy, band direction and their parameter derivatives at one momentum.

    Fields are floats (or arrays over a momentum grid, see :func:`bloch_field`).
    """

    E: float
    n: np.ndarray
    dE_dM: float
    dn_dM: np.ndarray
    dn_dM_sq: float


def _bloch(d: np.ndarray, dd: np.ndarray):
    E = np.linalg.norm(d, axis=-1)
    n = d / E[..., None]
    dE = np.sum(d * dd, axis=-1) / E
    dn = dd / E[..., None] - d * (dE / E**2)[..., None]
    return E, n, dE, dn, np.sum(dn * dn, axis=-1)


def bloch_point(model: TwoBandModel, k, M: float, eps_gap: float = DEFAULT_EPS_GAP) -> BlochPoint:
    """Bloch quantities at a single momentum; raises :class:`GaplessPoint` if ``|d| <= eps_gap``."""
    d = model.d(k, M)
    if d.ndim != 1:
        raise ValueError("bloch_point takes a single momentum; use bloch_field for grids")
    E = float(np.linalg.norm(d))
    if not E > eps_gap:
        raise GaplessPoint(f"|d| = {E:.3e} at k={np.asarray(k).tolist()}, M={M}")
    E, n, dE, dn, dn_sq = _bloch(d, model.dd_dM(k, M))
    return BlochPoint(float(E), n, float(dE), dn, float(dn_sq))


def bloch_field(
    model: TwoBandModel, k, M: float, eps_gap: float = DEFAULT_EPS_GAP
) -> tuple[BlochPoint, np.ndarray]:
    """Vectorized Bloch quantities over momenta ``k`` of shape ``(..., dim)``.

    Returns the fields and a boolean mask of gapless momenta. Gapless entries
    are NaN so that they cannot silently contribute to a sum.
    """
    d = model.d(k, M)
    dd = model.dd_dM(k, M)
    gapless = ~(np.linalg.norm(d, axis=-1) > eps_gap)
    with np.errstate(divide="ignore", invalid="ignore"):
        E, n, dE, dn, dn_sq = _bloch(d, dd)
    for arr in (E, n, dE, dn, dn_sq):
        arr[gapless] = np.nan
    return BlochPoint(E, n, dE, dn, dn_sq), gapless


def _fermion_operators(modes: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilators on the occupation basis.

    Basis states are ordered by occupation tuples with the first mode varying
    fastest, so for two modes: vac, c1^dag vac, c2^dag vac, c1^dag c2^dag vac.
    """
    states = [tuple(reversed(occ)) for occ in product((0, 1), repeat=modes)]
    index = {s: i for i, s in enumerate(states)}
    ops = []
    for a in range(modes):
        c = np.zeros((len(states), len(states)))
        for s, j in index.items():
            if s[a] == 1:
                t = list(s)
                t[a] = 0
                c[index[tuple(t)], j] = (-1) ** sum(s[:a])
        ops.append(c)
    return ops


_C = _fermion_operators(2)


def fock_hamiltonian(h) -> np.ndarray:
    """Second-quantized lift ``sum_ab h_ab c_a^dag c_b`` on the 4-dim two-mode Fock space."""
    h = numerics.check_hermitian(h, "single-particle Hamiltonian")
    if h.shape != (2, 2):
        raise ValueError("fock_hamiltonian expects a 2x2 Hamiltonian")
    out = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            out += h[a, b] * (_C[a].T @ _C[b])
    return out
