import numpy as np
import pytest

from _helpers import haar, random_curve, random_state
from interfgeom.bandmodels import PAULI
from interfgeom.errors import NotTangent, StepTooLarge, TypeChanged, TypeMismatch
from interfgeom.geometry import (
    BundlePoint,
    MetricValue,
    bures_metric_fd,
    bures_metric_parts_fd,
    dist_base,
    dist_base_bruteforce,
    dist_base_sq,
    dist_total,
    hermitian_form,
    horizontal_project,
    interferometric_metric_fd,
    purification,
    purification_inner,
    vertical_project,
)
from interfgeom.states import decompose, gibbs

SX, SZ = PAULI[0], PAULI[2]
KET0 = np.array([[1.0], [0.0]])
KET1 = np.array([[0.0], [1.0]])
PLUS = np.array([[1.0], [1.0]]) / np.sqrt(2)


def random_pair(rng, ranks, kernel=0):
    return (
        BundlePoint.lift(random_state(rng, ranks, kernel)),
        BundlePoint.lift(random_state(rng, ranks, kernel)),
    )


def test_metric_value_parts():
    m = MetricValue.from_parts(0.1, 0.2)
    assert abs(m.total - (m.classical + m.quantum)) <= 1e-12


def test_hermitian_form_self_and_gauge(rng):
    p = BundlePoint.lift(random_state(rng, [1, 2, 1]))
    assert hermitian_form(p, p) == pytest.approx(1.0, abs=1e-14)
    assert hermitian_form(p, p.gauge([np.eye(r) for r in p.ranks])) == pytest.approx(1.0, abs=1e-14)
    us = [haar(rng, r) for r in p.ranks]
    expected = sum(b.p * np.trace(u) for b, u in zip(p.blocks, us))
    assert abs(hermitian_form(p, p.gauge(us)) - expected) < 1e-13


def test_hermitian_form_equals_purification_inner(rng):
    for _ in range(20):
        p, q = random_pair(rng, [1, 1, 2])
        assert abs(hermitian_form(p, q) - purification_inner(p, q)) < 1e-13


def test_purification_inner_self_and_relabeling(rng):
    p, q = random_pair(rng, [2, 1, 1])
    assert purification_inner(p, p) == pytest.approx(1.0, abs=1e-14)
    perm = np.eye(3)[:, [2, 0, 1]]
    assert abs(purification_inner(p, q, perm) - purification_inner(p, q)) < 1e-13
    assert abs(purification_inner(p, q, haar(rng, 3)) - purification_inner(p, q)) < 1e-13


def test_dist_total_examples(rng):
    p, q = random_pair(rng, [1, 2])
    assert dist_total(p, p) == pytest.approx(0.0, abs=1e-7)
    a = BundlePoint.from_pairs([(1.0, KET0)])
    b = BundlePoint.from_pairs([(1.0, KET1)])
    assert dist_total(a, b) ** 2 == pytest.approx(2.0, abs=1e-14)
    flat = np.linalg.norm(purification(p) - purification(q))
    assert abs(dist_total(p, q) - flat) < 1e-12


def test_type_mismatch_is_rejected(rng):
    p = BundlePoint.lift(random_state(rng, [1, 2]))
    q = BundlePoint.lift(random_state(rng, [2, 1]))
    with pytest.raises(TypeMismatch):
        hermitian_form(p, q)
    with pytest.raises(TypeMismatch):
        dist_base(p, q)
    with pytest.raises(TypeMismatch):
        dist_base(np.eye(2) / 2, np.diag([0.7, 0.3]))


def test_dist_base_examples():
    assert dist_base(np.diag([0.7, 0.3]), np.diag([0.7, 0.3])) == 0.0
    expected = 2 * (1 - np.sqrt(0.42) - np.sqrt(0.12))
    assert dist_base_sq(np.diag([0.7, 0.3]), np.diag([0.6, 0.4])) == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(1.103e-2, rel=1e-3)
    pure0, plus = KET0 @ KET0.T, PLUS @ PLUS.T
    assert dist_base_sq(pure0, plus) == pytest.approx(2 * (1 - 1 / np.sqrt(2)), rel=1e-13)


def test_dist_base_bruteforce_examples(rng):
    a, b = np.diag([0.7, 0.3]), np.diag([0.6, 0.4])
    assert dist_base_bruteforce(a, a, samples=1000, seed=1) == pytest.approx(0.0, abs=1e-7)
    closed = dist_base(a, b)
    assert abs(dist_base_bruteforce(a, b, samples=10_000, seed=2) - closed) < 1e-6
    pure0, plus = KET0 @ KET0.T, PLUS @ PLUS.T
    assert abs(dist_base_bruteforce(pure0, plus, samples=2000, seed=3) - dist_base(pure0, plus)) < 1e-6


def test_bruteforce_bounds_closed_form_from_above(rng):
    rho, sigma = random_state(rng, [2, 1, 1]), random_state(rng, [2, 1, 1])
    closed = dist_base(rho, sigma)
    coarse = dist_base_bruteforce(rho, sigma, samples=100, seed=4, refine=False)
    fine = dist_base_bruteforce(rho, sigma, samples=10_000, seed=4, refine=False)
    assert coarse >= closed - 1e-9 and fine >= closed - 1e-9
    assert fine - closed <= coarse - closed


def test_dist_base_gauge_invariance_and_bounds(rng):
    for ranks in ([1, 1, 2], [2, 2], [1, 3]):
        p, q = random_pair(rng, ranks)
        pg = p.gauge([haar(rng, r) for r in p.ranks])
        qg = q.gauge([haar(rng, r) for r in q.ranks])
        d = dist_base(p, q)
        assert abs(dist_base(pg, qg) - d) < 1e-12
        assert abs(dist_base(q, p) - d) < 1e-13
        assert abs(dist_total(q, p) - dist_total(p, q)) < 1e-13
        assert d <= dist_total(pg, qg) + 1e-12


def test_dist_base_with_kernel(rng):
    rho, sigma = random_state(rng, [1, 1], kernel=1), random_state(rng, [1, 1], kernel=1)
    assert abs(dist_base(rho, sigma) - dist_base_bruteforce(rho, sigma, 4000, seed=5)) < 1e-6


def tangent(rng, w):
    n, r = w.shape
    z = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    horiz = z - w @ (w.conj().T @ z)
    x = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    return horiz, w @ (x - x.conj().T)


def test_vertical_and_horizontal_projections(rng):
    w = haar(rng, 4)[:, :2]
    horiz, vert = tangent(rng, w)
    np.testing.assert_allclose(vertical_project(w, vert), vert, atol=1e-13)
    np.testing.assert_allclose(vertical_project(w, horiz), 0, atol=1e-13)
    np.testing.assert_allclose(horizontal_project(w, vert), 0, atol=1e-13)
    np.testing.assert_allclose(horizontal_project(w, horiz), horiz, atol=1e-13)
    v = horiz + vert
    pv = vertical_project(w, v)
    np.testing.assert_allclose(vertical_project(w, pv), pv, atol=1e-12)
    assert np.linalg.norm(pv + horizontal_project(w, v) - v) < 1e-13


def test_projection_rejects_non_tangent(rng):
    w = haar(rng, 3)[:, :1]
    with pytest.raises(NotTangent):
        vertical_project(w, w)  # w^dagger w + w^dagger w = 2
    with pytest.raises(NotTangent):
        horizontal_project(np.ones((3, 1)), np.zeros((3, 1)))


def test_constant_curve_has_zero_metric():
    rho = np.diag([0.5, 0.3, 0.2])
    m = interferometric_metric_fd(lambda t: rho, 0.0)
    assert (m.classical, m.quantum, m.total) == (0.0, 0.0, 0.0)
    assert bures_metric_fd(lambda t: rho, 0.0) == 0.0


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_rotating_qubit_gibbs(beta):
    def curve(t):
        return gibbs(np.cos(t) * SZ + np.sin(t) * SX, beta)

    m = interferometric_metric_fd(curve, 0.0)
    assert abs(m.classical) < 1e-12
    assert m.quantum == pytest.approx(0.25, rel=1e-9)


def test_bures_pure_state_curve():
    def curve(t):
        psi = np.array([np.cos(t / 2), np.sin(t / 2)])
        return np.outer(psi, psi.conj())

    # |dn/dt| = 1 on the Bloch sphere, so the Fubini-Study value is 1/4
    assert bures_metric_fd(curve, 0.3) == pytest.approx(0.25, rel=1e-9)
    parts = bures_metric_parts_fd(curve, 0.3)
    assert abs(parts.classical) < 1e-12
    assert interferometric_metric_fd(curve, 0.3).total == pytest.approx(0.25, rel=1e-9)


def test_projector_velocity_is_off_diagonal(rng):
    curve = random_curve(rng, [1, 2, 1])
    t0 = 0.2
    p = decompose(curve(t0)).projectors()
    sizes = []
    for h in (1e-2, 5e-3, 2.5e-3):
        pm, pp = decompose(curve(t0 - h)).projectors(), decompose(curve(t0 + h)).projectors()
        sizes.append(max(np.linalg.norm(a @ ((c - b) / (2 * h)) @ a) for a, b, c in zip(p, pm, pp)))
    ratios = np.array(sizes[:-1]) / np.array(sizes[1:])
    assert np.all(np.abs(ratios - 4.0) < 0.2)


def test_stencil_failures():
    def crossing(t):
        return np.diag([0.5 + t, 0.5 - t])

    with pytest.raises(TypeChanged):
        interferometric_metric_fd(crossing, 0.0)

    def spinning(t):
        c, s = np.cos(10 * t), np.sin(10 * t)
        r = np.array([[c, -s], [s, c]])
        return r @ np.diag([0.6, 0.4]) @ r.T

    with pytest.raises(StepTooLarge):
        interferometric_metric_fd(spinning, 0.0, delta=0.2)
    with pytest.raises(ValueError):
        bures_metric_fd(spinning, 0.0, delta=-1.0)
