"""Gibbs-state pullbacks of the interferometric, Bures and Fubini-Study metrics.

For a two-band insulator the Gibbs state factorizes over momenta, so each
metric along the parameter ``M`` is a Brillouin-zone integral of a closed-form
integrand in ``E = |d|``, ``n = d/|d|`` and their ``M``-derivatives.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bandmodels import (
    DEFAULT_EPS_GAP,
    BlochPoint,
    TwoBandModel,
    bloch_field,
    bloch_hamiltonian,
    fock_hamiltonian,
)
from .errors import GaplessParameter, GaplessPoint, InterfGeomError
from .geometry import MetricValue, bures_metric_parts_fd, interferometric_metric_fd
from .numerics import cosh_minus_one_ratio, thermal_factors
from .states import gibbs

WORKERS_ENV = "INTERFGEOM_WORKERS"
DEFAULT_BZ_GRID = 201


def classical_integrand(bp: BlochPoint, beta: float):
    """Fisher-Rao term shared by both metrics: ``(beta^2/4) (dE/dM)^2 / (cosh(beta E) + 1)``."""
    inv_cosh_plus_one, _ = thermal_factors(beta * bp.E)
    return 0.25 * inv_cosh_plus_one * beta * beta * bp.dE_dM**2


def interf_quantum_integrand(bp: BlochPoint, beta: float):
    _, cosh_ratio = thermal_factors(beta * bp.E)
    return 0.25 * cosh_ratio * bp.dn_dM_sq


def bures_quantum_integrand(bp: BlochPoint, beta: float):
    return 0.25 * cosh_minus_one_ratio(beta * bp.E) * bp.dn_dM_sq


def interf_integrand(bp: BlochPoint, beta: float):
    """Interferometric integrand ``(1/4)[beta^2 E'^2 + cosh(beta E) |n'|^2]/(cosh(beta E) + 1)``."""
    return classical_integrand(bp, beta) + interf_quantum_integrand(bp, beta)


def bures_integrand(bp: BlochPoint, beta: float):
    """Bures integrand; its projector term carries ``(cosh(beta E) - 1)/cosh(beta E)``."""
    return classical_integrand(bp, beta) + bures_quantum_integrand(bp, beta)


def fubini_study_integrand(bp: BlochPoint):
    return 0.25 * bp.dn_dM_sq


def bz_grid(N: int, dim: int = 2) -> np.ndarray:
    """Cell midpoints of the uniform ``N^dim`` grid on ``[-pi, pi)^dim``, shape ``(N**dim, dim)``."""
    k = -np.pi + 2.0 * np.pi * (np.arange(N) + 0.5) / N
    mesh = np.meshgrid(*([k] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _exact_mean(values: np.ndarray, cells: int) -> tuple[float, int]:
    finite = np.isfinite(values)
    # math.fsum is exactly rounded, hence independent of summation order
    return math.fsum(values[finite].tolist()) / cells, int(values.size - finite.sum())


def bz_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    N: int,
    dim: int = 2,
    vectorized: bool = True,
) -> tuple[float, int]:
    """Midpoint-rule average of ``f`` over the Brillouin zone with measure ``d^dk/(2pi)^d``.

    ``f`` receives all midpoints at once as an ``(N**dim, dim)`` array (or one
    point at a time with ``vectorized=False``). Non-finite values and cells
    raising :class:`InterfGeomError` are excluded and counted. Returns
    ``(integral, excluded_cells)``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    ks = bz_grid(N, dim)
    if vectorized:
        values = np.asarray(f(ks), dtype=float).reshape(-1)
    else:
        values = np.empty(len(ks))
        for i, k in enumerate(ks):
            try:
                values[i] = f(k)
            except InterfGeomError:
                values[i] = np.nan
    return _exact_mean(values, len(ks))


def chern_number(
    model: TwoBandModel, M: float, N: int = 41, eps_gap: float = DEFAULT_EPS_GAP
) -> int:
    """Chern number of the lower band from lattice link variables on an ``N x N`` grid.

    The sign follows the Berry connection ``A = i<u|grad u>`` with
    ``C = (1/2pi) int curl A``.
    """
    if model.spatial_dim != 2:
        raise ValueError("chern_number needs a two-dimensional model")
    if N < 8:
        raise ValueError("N must be at least 8")
    ks = bz_grid(N, 2)
    d = model.d(ks, M)
    E = np.linalg.norm(d, axis=-1)
    if not np.all(E > eps_gap):
        raise GaplessParameter(f"gap closes on the {N}x{N} grid at M={M}")
    _, vecs = np.linalg.eigh(bloch_hamiltonian(d))
    u = vecs[:, :, 0].reshape(N, N, 2)

    def link(axis):
        z = np.sum(u.conj() * np.roll(u, -1, axis=axis), axis=-1)
        return z / np.abs(z)

    ux, uy = link(0), link(1)
    plaquette = ux * np.roll(uy, -1, axis=0) * np.conj(np.roll(ux, -1, axis=1)) * np.conj(uy)
    flux = -np.angle(plaquette)
    c = math.fsum(flux.ravel().tolist()) / (2.0 * np.pi)
    nearest = round(c)
    if abs(c - nearest) > 1e-6:
        raise ArithmeticError(f"lattice Chern sum {c} is not an integer")
    return int(nearest)


def per_momentum_oracle(
    model: TwoBandModel,
    k,
    M: float,
    beta: float,
    delta: float | None = None,
    eps_gap: float = DEFAULT_EPS_GAP,
) -> tuple[float, float]:
    """Metrics of the single-momentum Fock-space Gibbs family, by finite differences.

    Builds ``M -> gibbs(fock_hamiltonian(d(k; M) . sigma), beta)`` and returns
    the interferometric and Bures coefficients at ``M``. Independent of the
    closed-form integrands, which it exists to validate.
    """
    k = np.asarray(k, dtype=float)
    h = 1e-5 * max(1.0, abs(M)) if delta is None else delta
    for m in (M - h, M, M + h):
        if not np.linalg.norm(model.d(k, m)) > eps_gap:
            raise GaplessPoint(f"gapless at k={k.tolist()}, M={m}")

    def curve(m):
        return gibbs(fock_hamiltonian(model.hamiltonian(k, m)), beta)

    g_interf = interferometric_metric_fd(curve, M, h)
    g_bures = bures_metric_parts_fd(curve, M, h)
    return g_interf.total, g_bures.total


@dataclass(frozen=True)
class MetricSample:
    """Brillouin-zone integrated metrics at one ``(M, T)`` point."""

    M: float
    T: float
    g_interf: MetricValue
    g_bures: MetricValue
    g_fs: float
    bz_grid: int
    gapless_cells: int

    @property
    def beta(self) -> float:
        return 1.0 / self.T


def _row(model: TwoBandModel, M: float, temps: Sequence[float], N: int, eps_gap: float):
    ks = bz_grid(N, model.spatial_dim)
    bp, gapless = bloch_field(model, ks, M, eps_gap)
    cells = len(ks)
    n_gapless = int(gapless.sum())
    g_fs, _ = _exact_mean(fubini_study_integrand(bp), cells)
    out = []
    for T in temps:
        beta = 1.0 / T
        cl, _ = _exact_mean(classical_integrand(bp, beta), cells)
        qi, _ = _exact_mean(interf_quantum_integrand(bp, beta), cells)
        qb, _ = _exact_mean(bures_quantum_integrand(bp, beta), cells)
        out.append(
            MetricSample(
                float(M),
                float(T),
                MetricValue.from_parts(cl, qi),
                MetricValue.from_parts(cl, qb),
                g_fs,
                N,
                n_gapless,
            )
        )
    return out


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        return max(1, int(value))
    return 1


def metric_scan(
    model: TwoBandModel,
    M_values: Sequence[float],
    T_values: Sequence[float],
    N: int = DEFAULT_BZ_GRID,
    workers: int | None = None,
    eps_gap: float = DEFAULT_EPS_GAP,
) -> list[MetricSample]:
    """Integrate all three metrics over the zone for every ``(M, T)``, M-major.

    Rows of fixed ``M`` run in parallel on ``workers`` threads (default from the
    ``INTERFGEOM_WORKERS`` environment variable, else 1). Each sum is exactly
    rounded, so results do not depend on the worker count.
    """
    M_values = [float(m) for m in M_values]
    T_values = [float(t) for t in T_values]
    if not M_values or not T_values:
        raise ValueError("M_values and T_values must be nonempty")
    if any(not t > 0 for t in T_values):
        raise ValueError("temperatures must be positive")
    if N < 2:
        raise ValueError("N must be at least 2")
    workers = default_workers() if workers is None else max(1, int(workers))

    def job(m):
        return _row(model, m, T_values, N, eps_gap)

    if workers == 1:
        rows = [job(m) for m in M_values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, M_values))
    return [s for row in rows for s in row]
