import numpy as np
import pytest

from qubus.channels.coherence import CouplingSpec, coherence_parameter
from qubus.measures.entanglement import (
    concurrence,
    default_peak_grid,
    entanglement_at,
    fidelity_pure,
    orthogonalize,
    peak_scan,
    von_neumann_entropy,
)
from qubus.utils.errors import ValidationError


def test_concurrence_reference_states(bell_density):
    assert concurrence(bell_density) == pytest.approx(1.0, abs=1e-9)
    assert concurrence(np.diag([1.0, 0.0, 0.0, 0.0])) == 0.0
    assert concurrence(np.eye(4) / 4) == 0.0


def test_concurrence_werner(bell_density):
    for p in (0.2, 0.5, 0.8, 1.0):
        rho = p * bell_density + (1 - p) * np.eye(4) / 4
        assert concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-9)


def random_unitary(rng, d=2):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_concurrence_is_invariant_under_local_unitaries(rng, random_density, bell_density):
    for _ in range(20):
        rho = 0.7 * bell_density + 0.3 * random_density(4)
        u = np.kron(random_unitary(rng), random_unitary(rng))
        c = concurrence(rho)
        assert c > 0
        assert abs(concurrence(u @ rho @ u.conj().T) - c) <= 1e-9


def test_concurrence_rejects_bad_input():
    with pytest.raises(ValidationError):
        concurrence(np.eye(2) / 2)
    with pytest.raises(ValidationError):
        concurrence(np.eye(4))


def test_entropy():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)
    assert von_neumann_entropy(np.diag([1.0, 0, 0, 0])) == 0.0
    assert von_neumann_entropy(np.diag([0.5, 0.5, 0, 0])) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_pure(bell_density):
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    assert fidelity_pure(bell_density, psi) == pytest.approx(1.0, abs=1e-12)
    assert fidelity_pure(np.eye(4) / 4, psi) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(ValidationError):
        fidelity_pure(bell_density, np.array([1.0, 0, 0, 1.0]))


def test_orthogonalize_is_a_density_matrix():
    cases = [(1.0, 1.0, 1.0, 1.0), (100.0, 1.0, 5.0, 0.01), (2.0, 1.0, 0.1, 3.0)]
    for alpha, chi, gamma, t in cases:
        rho = orthogonalize(alpha, chi, gamma, t)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(rho, rho.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_orthogonalize_reduced_coherence():
    # Tracing out the probe leaves |zeta| delta / 2 on the qubit coherence
    alpha, chi, gamma, t = 1.5, 1.0, 0.7, 0.8
    rho = orthogonalize(alpha, chi, gamma, t)
    reduced = rho[0, 2] + rho[1, 3]
    zeta = coherence_parameter(alpha, CouplingSpec(chi, gamma, t))
    amp = alpha * np.exp(-gamma * t)
    delta = np.exp(-2 * amp ** 2 * np.sin(chi * t) ** 2)
    assert abs(reduced) == pytest.approx(abs(zeta) * delta / 2, rel=1e-12)


def test_orthogonalize_rejects_non_positive_alpha():
    with pytest.raises(ValidationError):
        orthogonalize(0.0, 1.0, 1.0, 1.0)


def test_no_entanglement_at_start():
    conc, entropy = entanglement_at(10.0, 1.0, 0.0)
    assert conc == 0.0
    assert entropy == pytest.approx(0.0, abs=1e-9)


def test_peak_at_large_amplitude():
    report = peak_scan(1e4, 5.0)
    assert report.c_max == pytest.approx(0.998, abs=1e-3)
    assert 5e-3 <= report.entropy_at_peak <= 5e-2
    assert 0 < report.t_star < 1e-2


def test_peak_grid_reaches_below_the_peak():
    grid = default_peak_grid(1e4)
    assert grid[0] <= 1e-7
    assert grid[-1] == pytest.approx(np.pi)
    assert np.all(np.diff(grid) > 0)


def test_peak_grows_with_amplitude():
    c_max = [peak_scan(alpha, 1.0).c_max for alpha in (50.0, 100.0, 200.0)]
    assert c_max[0] < c_max[1] < c_max[2]


def test_peak_drops_with_relative_damping():
    c_max = [peak_scan(100.0, ratio).c_max for ratio in (1.0, 7.0, 21.0)]
    assert c_max[0] > c_max[1] > c_max[2]


def test_entropy_at_peak_drops_with_amplitude():
    for ratio in (1.0, 3.0, 5.0, 10.0, 15.0):
        entropy = [peak_scan(alpha, ratio).entropy_at_peak for alpha in (50.0, 100.0, 200.0)]
        assert entropy[0] > entropy[1] > entropy[2]


def test_peak_scan_empty_grid():
    with pytest.raises(ValidationError):
        peak_scan(10.0, 1.0, grid=[])
