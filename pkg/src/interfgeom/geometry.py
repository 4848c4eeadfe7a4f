"""Bundle geometry of typed density matrices.

Points of the bundle are tuples ``((p_i, w_i))`` of block probabilities and
orthonormal frames. The gauge group acts by ``w_i -> w_i U_i`` with one
unitary per block. This module provides the Hermitian form on bundle points,
the induced distances on the bundle and on states, generalized purifications,
the vertical/horizontal splitting of frame tangents, and finite-difference
evaluators for the interferometric and Bures metrics along curves of states.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from . import numerics
from .errors import (
    MetricDiagnosticsError,
    NotTangent,
    StepTooLarge,
    TypeChanged,
    TypeMismatch,
)
from .states import (
    DEFAULT_EPS_DEG,
    DEFAULT_EPS_ZERO,
    Block,
    MixedState,
    TypedDecomposition,
    as_state,
    decompose,
)

RADICAND_FLOOR = -1e-12
IMAG_RESIDUE_TOL = 1e-10
TANGENT_TOL = 1e-10

Curve = Callable[[float], "MixedState | np.ndarray"]


class BundlePoint(TypedDecomposition):
    """A specific lift of a state: the frames are kept, not just their projectors."""

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, np.ndarray]], check: bool = True) -> "BundlePoint":
        blocks = tuple(Block(float(p), numerics.as_matrix(w, "frame")) for p, w in pairs)
        n = blocks[0].frame.shape[0]
        return cls(n, blocks, n - sum(b.rank for b in blocks), check=check)

    @classmethod
    def from_decomposition(cls, d: TypedDecomposition) -> "BundlePoint":
        return cls(d.dim, d.blocks, d.kernel_rank, check=False)

    @classmethod
    def lift(cls, rho, eps_deg: float = DEFAULT_EPS_DEG, eps_zero: float = DEFAULT_EPS_ZERO) -> "BundlePoint":
        """Lift a state to the bundle using the eigenvector frames of ``decompose``."""
        return cls.from_decomposition(decompose(rho, eps_deg, eps_zero))

    def gauge(self, unitaries: Sequence[np.ndarray]) -> "BundlePoint":
        """Right action of the gauge group, ``w_i -> w_i U_i``."""
        if len(unitaries) != len(self.blocks):
            raise TypeMismatch("need one unitary per block")
        blocks = tuple(Block(b.p, b.frame @ u) for b, u in zip(self.blocks, unitaries))
        return BundlePoint(self.dim, blocks, self.kernel_rank, check=False)


@dataclass(frozen=True)
class MetricValue:
    """Metric coefficient split into its Fisher-Rao and projector parts."""

    classical: float
    quantum: float
    total: float

    @classmethod
    def from_parts(cls, classical: float, quantum: float) -> "MetricValue":
        return cls(float(classical), float(quantum), float(classical) + float(quantum))


def _require_same_type(a: TypedDecomposition, b: TypedDecomposition) -> None:
    if a.dim != b.dim:
        raise TypeMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    if a.ranks != b.ranks or a.kernel_rank != b.kernel_rank:
        raise TypeMismatch(
            f"types differ: ranks {a.ranks} (kernel {a.kernel_rank}) "
            f"vs {b.ranks} (kernel {b.kernel_rank})"
        )


def hermitian_form(p: TypedDecomposition, q: TypedDecomposition) -> complex:
    """``sum_i sqrt(p_i q_i) Tr(w_i^dagger v_i)`` for two points of the same type."""
    _require_same_type(p, q)
    total = 0j
    for bp, bq in zip(p.blocks, q.blocks):
        total += np.sqrt(bp.p * bq.p) * np.vdot(bp.frame, bq.frame)
    return complex(total)


def _sqrt_clamped(radicand: float) -> float:
    if radicand < RADICAND_FLOOR:
        raise MetricDiagnosticsError(f"negative squared distance {radicand:.3e}")
    return float(np.sqrt(max(radicand, 0.0)))


def dist_total(p: TypedDecomposition, q: TypedDecomposition) -> float:
    """Distance between two bundle points, ``sqrt(2(1 - Re<p, q>))``."""
    return _sqrt_clamped(2.0 * (1.0 - hermitian_form(p, q).real))


def purification(p: TypedDecomposition, ancilla: np.ndarray | None = None) -> np.ndarray:
    """Generalized purification ``sum_i sqrt(p_i) w_i (x) a_i``.

    The ancilla amplitudes ``a_i`` are the columns of the fixed ``k x k``
    unitary ``ancilla`` (identity by default). Frames are zero-padded to the
    largest block rank so all terms share one shape.
    """
    k = len(p.blocks)
    a = np.eye(k, dtype=complex) if ancilla is None else numerics.as_matrix(ancilla, "ancilla")
    if a.shape != (k, k):
        raise ValueError(f"ancilla must be {k}x{k}")
    width = max(p.ranks)
    out = np.zeros((p.dim * k, width), dtype=complex)
    for i, b in enumerate(p.blocks):
        padded = np.zeros((p.dim, width), dtype=complex)
        padded[:, : b.rank] = b.frame
        out += np.sqrt(b.p) * np.kron(padded, a[:, i : i + 1])
    return out


def purification_inner(
    p: TypedDecomposition, q: TypedDecomposition, ancilla: np.ndarray | None = None
) -> complex:
    """Hilbert-Schmidt inner product of the two generalized purifications."""
    _require_same_type(p, q)
    return complex(np.vdot(purification(p, ancilla), purification(q, ancilla)))


def _as_decomposition(x, eps_deg: float, eps_zero: float) -> TypedDecomposition:
    if isinstance(x, TypedDecomposition):
        return x
    return decompose(x, eps_deg, eps_zero)


def block_overlaps(dp: TypedDecomposition, dq: TypedDecomposition) -> list[np.ndarray]:
    """Per-block frame overlaps ``w_i^dagger v_i`` after a type check."""
    _require_same_type(dp, dq)
    return [bp.frame.conj().T @ bq.frame for bp, bq in zip(dp.blocks, dq.blocks)]


def dist_base_sq(
    rho, sigma, eps_deg: float = DEFAULT_EPS_DEG, eps_zero: float = DEFAULT_EPS_ZERO
) -> float:
    """Squared interferometric distance between two states of the same type.

    The infimum over gauge transformations is taken block by block in closed
    form: the best ``Re Tr(w_i^dagger v_i U_i)`` is the nuclear norm of
    ``w_i^dagger v_i``. Blocks are paired in descending-eigenvalue order.
    Inputs may be states, matrices or decompositions.
    """
    dp = _as_decomposition(rho, eps_deg, eps_zero)
    dq = _as_decomposition(sigma, eps_deg, eps_zero)
    fid = 0.0
    for bp, bq, a in zip(dp.blocks, dq.blocks, block_overlaps(dp, dq)):
        fid += np.sqrt(bp.p * bq.p) * numerics.nuclear_norm(a)
    radicand = 2.0 * (1.0 - fid)
    if radicand < RADICAND_FLOOR:
        raise MetricDiagnosticsError(f"negative squared distance {radicand:.3e}")
    return max(radicand, 0.0)


def dist_base(
    rho, sigma, eps_deg: float = DEFAULT_EPS_DEG, eps_zero: float = DEFAULT_EPS_ZERO
) -> float:
    """Interferometric distance on the stratum of states with a fixed type."""
    return float(np.sqrt(dist_base_sq(rho, sigma, eps_deg, eps_zero)))


def _anti_hermitian(params: np.ndarray, r: int) -> np.ndarray:
    """Map ``r*r`` real parameters onto an anti-Hermitian ``r x r`` matrix."""
    x = np.zeros((r, r), dtype=complex)
    iu = np.triu_indices(r, 1)
    m = len(iu[0])
    x[iu] = params[:m] + 1j * params[m : 2 * m]
    x = x - x.conj().T
    x[np.diag_indices(r)] = 1j * params[2 * m :]
    return x


def dist_base_bruteforce(
    rho,
    sigma,
    samples: int = 10_000,
    seed=None,
    refine: bool = True,
    eps_deg: float = DEFAULT_EPS_DEG,
    eps_zero: float = DEFAULT_EPS_ZERO,
) -> float:
    """Minimize the bundle distance over sampled gauge tuples, then polish locally.

    Draws ``samples`` Haar-random tuples ``(U_1, ..., U_k)``, keeps the best,
    and (if ``refine``) runs BFGS on exponential coordinates around it. No
    singular value decomposition is used, so this is an independent check on
    :func:`dist_base`.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    dp = _as_decomposition(rho, eps_deg, eps_zero)
    dq = _as_decomposition(sigma, eps_deg, eps_zero)
    overlaps = block_overlaps(dp, dq)
    weights = [np.sqrt(bp.p * bq.p) for bp, bq in zip(dp.blocks, dq.blocks)]
    rng = np.random.default_rng(seed)

    score = np.zeros(samples)
    draws = []
    for a, wgt in zip(overlaps, weights):
        us = numerics.haar_unitaries(rng, samples, a.shape[0])
        score += wgt * np.einsum("jk,skj->s", a, us).real
        draws.append(us)
    best = int(np.argmax(score))
    start = [us[best] for us in draws]
    fid = float(score[best])

    if refine:
        sizes = [a.shape[0] for a in overlaps]
        offsets = np.cumsum([0] + [r * r for r in sizes])

        def neg_fidelity(x):
            val = 0.0
            for i, (a, wgt, u0, r) in enumerate(zip(overlaps, weights, start, sizes)):
                u = u0 @ expm(_anti_hermitian(x[offsets[i] : offsets[i + 1]], r))
                val += wgt * np.trace(a @ u).real
            return -val

        res = minimize(neg_fidelity, np.zeros(offsets[-1]), method="BFGS", options={"gtol": 1e-12})
        fid = max(fid, -float(res.fun))
    return _sqrt_clamped(2.0 * (1.0 - fid))


def _check_tangent(w: np.ndarray, v: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    w = numerics.as_matrix(w, "frame")
    v = numerics.as_matrix(v, "tangent")
    if v.shape != w.shape:
        raise NotTangent(f"tangent shape {v.shape} does not match frame shape {w.shape}")
    r = w.shape[1]
    if np.linalg.norm(w.conj().T @ w - np.eye(r)) > tol:
        raise NotTangent("frame columns are not orthonormal")
    scale = 1.0 + np.linalg.norm(v)
    if np.linalg.norm(v.conj().T @ w + w.conj().T @ v) > tol * scale:
        raise NotTangent("v^dagger w + w^dagger v != 0")
    return w, v


def vertical_project(w, v, tol: float = TANGENT_TOL) -> np.ndarray:
    """Component of the frame tangent ``v`` along the gauge orbit, ``w w^dagger v``."""
    w, v = _check_tangent(w, v, tol)
    return w @ (w.conj().T @ v)


def horizontal_project(w, v, tol: float = TANGENT_TOL) -> np.ndarray:
    """Component of ``v`` orthogonal to the gauge orbit, ``v - w w^dagger v``."""
    w, v = _check_tangent(w, v, tol)
    return v - w @ (w.conj().T @ v)


def default_step(t0: float) -> float:
    return 1e-5 * max(1.0, abs(t0))


def _stencil(
    curve: Curve, t0: float, delta: float | None, eps_deg: float, eps_zero: float
) -> tuple[float, list[MixedState], list[TypedDecomposition]]:
    h = default_step(t0) if delta is None else float(delta)
    if h <= 0:
        raise ValueError("step must be positive")
    states = [as_state(curve(t)) for t in (t0 - h, t0, t0 + h)]
    decs = [decompose(s, eps_deg, eps_zero) for s in states]
    mid = decs[1]
    for d in (decs[0], decs[2]):
        if not d.same_type(mid):
            raise TypeChanged(
                f"type changes across [{t0 - h}, {t0 + h}]: {mid.ranks} vs {d.ranks}"
            )
    ps = mid.probabilities
    # blocks are matched by order; a side block drifting by half a gap, or
    # rotating away from its partner, means the order is not trustworthy
    half_gap = 0.5 * np.min(np.abs(np.diff(ps))) if len(ps) > 1 else np.inf
    for d in (decs[0], decs[2]):
        for b0, b in zip(mid.blocks, d.blocks):
            overlap = np.linalg.norm(b0.frame.conj().T @ b.frame) ** 2 / b0.rank
            if abs(b.p - b0.p) >= half_gap or overlap < 0.5:
                raise StepTooLarge(f"blocks cannot be matched across the stencil at t0={t0}")
    return h, states, decs


def interferometric_metric_fd(
    curve: Curve,
    t0: float,
    delta: float | None = None,
    eps_deg: float = DEFAULT_EPS_DEG,
    eps_zero: float = DEFAULT_EPS_ZERO,
) -> MetricValue:
    """Interferometric metric coefficient of a curve of states at ``t0``.

    Central differences give the block probability velocities and projector
    velocities; the classical part is ``(1/4) sum r_i pdot_i^2 / p_i`` and the
    quantum part ``sum p_i Tr(P_i Pdot_i Pdot_i)``.
    """
    h, _, (dm, d0, dp) = _stencil(curve, t0, delta, eps_deg, eps_zero)
    classical = 0.0
    quantum = 0.0
    for bm, b0, bp in zip(dm.blocks, d0.blocks, dp.blocks):
        pdot = (bp.p - bm.p) / (2.0 * h)
        classical += 0.25 * b0.rank * pdot * pdot / b0.p
        proj_dot = (bp.projector - bm.projector) / (2.0 * h)
        g = np.trace(b0.projector @ proj_dot @ proj_dot)
        if abs(g.imag) > IMAG_RESIDUE_TOL * (1.0 + abs(g.real)):
            raise MetricDiagnosticsError(f"Tr(P dP dP) has imaginary part {g.imag:.3e}")
        quantum += b0.p * g.real
    return MetricValue.from_parts(classical, quantum)


def bures_metric_parts_fd(
    curve: Curve,
    t0: float,
    delta: float | None = None,
    eps_deg: float = DEFAULT_EPS_DEG,
    eps_zero: float = DEFAULT_EPS_ZERO,
) -> MetricValue:
    """Bures metric coefficient ``(1/2) sum_{jl} |<j|rho'|l>|^2 / (l_j + l_l)``.

    Pairs inside one eigenvalue block form the classical part, pairs across
    blocks (including block-kernel pairs) the quantum part. Kernel eigenvalues
    count as exactly zero, so kernel-kernel pairs drop out.
    """
    h, (sm, s0, sp), (_, d0, _) = _stencil(curve, t0, delta, eps_deg, eps_zero)
    rho_dot = (sp.matrix - sm.matrix) / (2.0 * h)
    frames = d0.frames
    labels = np.concatenate([np.full(b.rank, i) for i, b in enumerate(d0.blocks)])
    lam = np.concatenate([np.full(b.rank, b.p) for b in d0.blocks])
    if d0.kernel_rank:
        # complete the basis with the kernel of rho
        w, v = numerics.eigh(s0.matrix)
        kernel = v[:, : d0.kernel_rank]
        frames = frames + [kernel]
        labels = np.concatenate([labels, np.full(d0.kernel_rank, -1)])
        lam = np.concatenate([lam, np.zeros(d0.kernel_rank)])
    basis = np.hstack(frames)
    x = basis.conj().T @ rho_dot @ basis
    denom = lam[:, None] + lam[None, :]
    keep = denom > eps_zero
    terms = np.zeros(denom.shape)
    terms[keep] = 0.5 * np.abs(x[keep]) ** 2 / denom[keep]
    same = labels[:, None] == labels[None, :]
    return MetricValue.from_parts(terms[same].sum(), terms[~same].sum())


def bures_metric_fd(
    curve: Curve,
    t0: float,
    delta: float | None = None,
    eps_deg: float = DEFAULT_EPS_DEG,
    eps_zero: float = DEFAULT_EPS_ZERO,
) -> float:
    return bures_metric_parts_fd(curve, t0, delta, eps_deg, eps_zero).total
