"""Mach-Zehnder measurement of a mixed internal state.

A particle enters arm 0 with internal state ``rho``. Arm 0 applies a unitary
``V`` commuting with ``rho`` and arm 1 applies ``U``. Ports are named by their
physics rather than their index: the *constructive* port has probability
``(1 + Re Tr(U rho V^dagger))/2`` and reaches 1 when ``U = V``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import InvalidSetup
from .geometry import dist_base
from .states import DEFAULT_EPS_DEG, DEFAULT_EPS_ZERO, MixedState, as_state, decompose

UNITARY_TOL = 1e-10
COMMUTATOR_TOL = 1e-8

# |0> -> (|0> + i|1>)/sqrt(2); the constructive output is port 1
SYMMETRIC_SPLITTER = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2.0)
# |l> -> (|0> + (-1)^l |1>)/sqrt(2); the constructive output is port 0
HADAMARD_SPLITTER = np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)
_SPLITTERS = {"symmetric": (SYMMETRIC_SPLITTER, 1), "hadamard": (HADAMARD_SPLITTER, 0)}


def _check_unitary(u, name: str, n: int) -> np.ndarray:
    try:
        u = numerics.as_matrix(u, name)
    except ValueError as exc:
        raise InvalidSetup(str(exc)) from None
    if u.shape != (n, n):
        raise InvalidSetup(f"{name} must be {n}x{n}, got {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(n)) > UNITARY_TOL:
        raise InvalidSetup(f"{name} is not unitary")
    return u


@dataclass(frozen=True, eq=False)
class InterferometerSetup:
    rho: MixedState
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        rho = as_state(self.rho)
        n = rho.dim
        u = _check_unitary(self.U, "U", n)
        v = _check_unitary(self.V, "V", n)
        if np.linalg.norm(v @ rho.matrix - rho.matrix @ v) >= COMMUTATOR_TOL:
            raise InvalidSetup("V must commute with rho")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "V", v)


def port_probability(setup: InterferometerSetup) -> float:
    """Constructive-port probability ``(1 + Re Tr(U rho V^dagger))/2``."""
    overlap = np.trace(setup.U @ setup.rho.matrix @ setup.V.conj().T)
    return 0.5 * (1.0 + overlap.real)


def simulate_chain(rho, U, V, beam_splitter: str = "symmetric") -> tuple[float, float]:
    """Propagate ``|0><0| (x) rho`` through splitter, arms and splitter explicitly.

    Returns ``(constructive, destructive)`` port probabilities. With the
    ``"hadamard"`` splitter the two output arms swap roles.
    """
    setup = InterferometerSetup(rho, U, V)
    try:
        bs, constructive = _SPLITTERS[beam_splitter]
    except KeyError:
        raise ValueError(f"unknown beam splitter {beam_splitter!r}") from None
    n = setup.rho.dim
    eye = np.eye(n)
    state = np.kron(np.diag([1.0, 0.0]), setup.rho.matrix)
    splitter = np.kron(bs, eye)
    arms = np.kron(np.diag([1.0, 0.0]), setup.V) + np.kron(np.diag([0.0, 1.0]), setup.U)
    for op in (splitter, arms, splitter):
        state = op @ state @ op.conj().T
    ports = [np.trace(state[a * n : (a + 1) * n, a * n : (a + 1) * n]).real for a in (0, 1)]
    return float(ports[constructive]), float(ports[1 - constructive])


def max_port_probability(
    rho,
    U,
    eps_deg: float = DEFAULT_EPS_DEG,
    eps_zero: float = DEFAULT_EPS_ZERO,
) -> tuple[float, np.ndarray]:
    """Best constructive-port probability over arm-0 unitaries commuting with ``rho``.

    Each block unitary is the polar factor of ``w_i^dagger U w_i``; the kernel
    block is left as the identity since it carries zero weight. The returned
    probability is ``1 - d^2/4`` with ``d`` the interferometric distance between
    ``rho`` and ``U rho U^dagger``.
    """
    rho = as_state(rho)
    n = rho.dim
    U = _check_unitary(U, "U", n)
    dec = decompose(rho, eps_deg, eps_zero)
    v_opt = np.eye(n, dtype=complex)
    for w in dec.frames:
        v_opt -= w @ w.conj().T
        v_opt += w @ numerics.polar_unitary(w.conj().T @ U @ w) @ w.conj().T
    rotated = MixedState(U @ rho.matrix @ U.conj().T)
    d = dist_base(dec, decompose(rotated, eps_deg, eps_zero))
    return 1.0 - 0.25 * d * d, v_opt
