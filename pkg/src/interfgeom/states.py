"""Density matrices, their degeneracy-typed spectral decomposition, and Gibbs states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import AmbiguousClustering, InvalidState

STATE_TOL = 1e-10
DEFAULT_EPS_DEG = 1e-8
DEFAULT_EPS_ZERO = 1e-12


@dataclass(frozen=True, eq=False)
class MixedState:
    """A validated density matrix: Hermitian, positive semidefinite, unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        try:
            m = numerics.as_matrix(self.matrix, "density matrix")
        except ValueError as exc:
            raise InvalidState(str(exc)) from None
        if m.shape[0] != m.shape[1]:
            raise InvalidState(f"density matrix must be square, got {m.shape}")
        res = numerics.hermiticity_residual(m)
        if res > STATE_TOL:
            raise InvalidState(f"density matrix is not Hermitian (residual {res:.3e})")
        m = numerics.hermitianize(m)
        tr = np.trace(m).real
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidState(f"trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -STATE_TOL:
            raise InvalidState(f"negative eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)


def as_state(rho) -> MixedState:
    return rho if isinstance(rho, MixedState) else MixedState(rho)


@dataclass(frozen=True, eq=False)
class Block:
    """One eigenspace: probability ``p`` and an orthonormal ``n x r`` frame."""

    p: float
    frame: np.ndarray

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T


@dataclass(frozen=True, eq=False)
class TypedDecomposition:
    """Spectral decomposition grouped into eigenspaces of distinct nonzero eigenvalue.

    Blocks are ordered by strictly decreasing probability. The kernel is only
    recorded through its dimension ``kernel_rank``.
    """

    dim: int
    blocks: tuple[Block, ...]
    kernel_rank: int = 0
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.check:
            self.validate()

    @property
    def ranks(self) -> tuple[int, ...]:
        """Block ranks in descending-probability order."""
        return tuple(b.rank for b in self.blocks)

    @property
    def type(self) -> tuple[int, ...]:
        """The type as a nondecreasing tuple of ranks."""
        return tuple(sorted(self.ranks))

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([b.p for b in self.blocks])

    @property
    def frames(self) -> list[np.ndarray]:
        return [b.frame for b in self.blocks]

    def projectors(self) -> list[np.ndarray]:
        return [b.projector for b in self.blocks]

    def same_type(self, other: "TypedDecomposition") -> bool:
        return (
            self.dim == other.dim
            and self.ranks == other.ranks
            and self.kernel_rank == other.kernel_rank
        )

    def validate(self, tol: float = STATE_TOL) -> None:
        ps = self.probabilities
        if len(ps) == 0:
            raise InvalidState("decomposition has no blocks")
        if np.any(ps <= 0):
            raise InvalidState("block probabilities must be positive")
        if np.any(np.diff(ps) >= 0):
            raise InvalidState("block probabilities must be strictly decreasing")
        if sum(self.ranks) + self.kernel_rank != self.dim:
            raise InvalidState("ranks plus kernel rank must equal the dimension")
        if abs(float(np.dot(self.ranks, ps)) - 1.0) > tol:
            raise InvalidState("sum of rank-weighted probabilities must be 1")
        w = np.hstack(self.frames)
        if w.shape[0] != self.dim:
            raise InvalidState("frame row count must equal the dimension")
        # orthonormality within blocks and cross-orthogonality in one check
        if np.linalg.norm(w.conj().T @ w - np.eye(w.shape[1])) > tol * max(1, w.shape[1]):
            raise InvalidState("frames are not orthonormal")


def _cluster(values: np.ndarray, threshold: float) -> list[list[int]]:
    """Single-linkage clusters of descending ``values``; reject near-threshold gaps."""
    clusters = [[0]]
    for j in range(1, len(values)):
        gap = values[j - 1] - values[j]
        if gap < threshold:
            clusters[-1].append(j)
            continue
        if gap < 2.0 * threshold:
            raise AmbiguousClustering(
                f"eigenvalue gap {gap:.3e} lies within [eps, 2 eps) of threshold {threshold:.3e}"
            )
        clusters.append([j])
    return clusters


def decompose(
    rho,
    eps_deg: float = DEFAULT_EPS_DEG,
    eps_zero: float = DEFAULT_EPS_ZERO,
) -> TypedDecomposition:
    """Split a density matrix into eigenspaces of distinct nonzero eigenvalue.

    Eigenvalues below ``eps_zero`` go to the kernel. The rest are clustered by
    single linkage: adjacent sorted eigenvalues closer than ``eps_deg`` times the
    spectral range (measured from zero, the kernel eigenvalue, to the largest
    eigenvalue) share a block. A gap in ``[eps, 2 eps)`` raises
    :class:`AmbiguousClustering`.
    """
    if eps_deg <= 0 or eps_zero <= 0:
        raise ValueError("eps_deg and eps_zero must be positive")
    state = as_state(rho)
    w, v = numerics.eigh(state.matrix)
    w, v = w[::-1], v[:, ::-1]
    nonzero = int(np.count_nonzero(w >= eps_zero))
    if nonzero == 0:
        raise InvalidState("all eigenvalues are below eps_zero")
    vals = w[:nonzero]
    threshold = eps_deg * vals[0]
    blocks = []
    for idx in _cluster(vals, threshold):
        blocks.append(Block(float(np.mean(vals[idx])), v[:, idx].copy()))
    return TypedDecomposition(state.dim, tuple(blocks), state.dim - nonzero)


def compose(decomposition: TypedDecomposition) -> MixedState:
    """Rebuild the density matrix ``sum_i p_i w_i w_i^dagger``."""
    n = decomposition.dim
    rho = np.zeros((n, n), dtype=complex)
    for b in decomposition.blocks:
        rho += b.p * (b.frame @ b.frame.conj().T)
    return MixedState(rho)


def gibbs(h, beta: float) -> MixedState:
    """Thermal state ``exp(-beta H)/Tr exp(-beta H)`` built in the eigenbasis of ``H``.

    Exponents are shifted by their maximum before exponentiation, so any
    finite ``beta`` is safe.
    """
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    energies, vecs = numerics.eigh(h)
    expo = -beta * energies
    weights = np.exp(expo - expo.max())
    weights /= weights.sum()
    rho = (vecs * weights) @ vecs.conj().T
    return MixedState(numerics.hermitianize(rho))
