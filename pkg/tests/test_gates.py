import numpy as np
import pytest

from qubus.gates.cz import (
    J,
    ZA,
    ZB,
    LowLossMap,
    apply_operator_sum,
    calibrate_beta,
    channel_decomposition,
    conditional_phase,
    cz_channel,
    gate_output,
    iterated_cz,
    l_from_l_tot,
    loss_sweep,
    low_loss_observable,
    observable_kernel,
    process_matrix,
    xi2_kernel,
)
from qubus.gates.displacement import (
    closing_alpha3,
    conditional_displacement,
    lossless_amplitudes,
)
from qubus.utils.errors import ValidationError


def test_lossless_sequence_is_a_pure_conditional_displacement():
    alpha, theta = 1.0, 0.3
    report = conditional_displacement(*lossless_amplitudes(alpha, theta), theta, 0.0)
    assert abs(report.residual) <= 1e-12
    assert report.effective_beta == pytest.approx(2j * alpha * np.sin(theta), abs=1e-12)
    assert abs(report.engine_dephasing) <= 1e-12
    assert abs(report.engine_phase) <= 1e-12
    assert report.closed_phase == pytest.approx(0.0, abs=1e-12)


def test_closing_displacement_removes_residual(rng):
    for _ in range(20):
        a1, a2 = rng.uniform(-3, 3, size=2)
        theta, l = rng.uniform(-np.pi, np.pi), rng.uniform(0, 0.5)
        report = conditional_displacement(a1, a2, closing_alpha3(a1, a2, theta, l), theta, l)
        assert abs(report.residual) <= 1e-12
        expected = -1j * a2 * np.exp(-2 * l) * np.sin(theta)
        assert report.effective_beta == pytest.approx(expected, abs=1e-12)


def test_conditional_displacement_engine_matches_closed_form(rng):
    for _ in range(200):
        a1, a2, a3 = rng.uniform(-3, 3, size=3)
        theta, l = rng.uniform(-np.pi, np.pi), rng.uniform(0, 0.5)
        report = conditional_displacement(a1, a2, a3, theta, l)
        scale = max(1.0, abs(report.closed_phase), report.closed_dephasing)
        assert abs(report.engine_dephasing - report.closed_dephasing) <= 1e-12 * scale
        assert report.phase_deviation() <= 1e-12 * scale


def test_printed_phase_disagrees_with_engine():
    report = conditional_displacement(1.0, -2.0, 1.0, 0.4, 0.2)
    assert report.T != pytest.approx(report.T_printed)
    assert report.phase_deviation(printed=True) > 1e-3


def test_large_amplitude_sequence_stays_finite():
    theta, l = 0.01, 0.1
    a2 = -2000.0
    a1 = -a2 * np.cos(theta) * np.exp(2 * l) / 2
    report = conditional_displacement(a1, a2, closing_alpha3(a1, a2, theta, l), theta, l)
    assert np.isfinite(report.engine_dephasing)
    assert report.engine_dephasing == pytest.approx(report.closed_dephasing, rel=1e-9)
    assert report.phase_deviation() <= 1e-10 * abs(report.closed_phase)


def test_conditional_displacement_rejects_negative_loss():
    with pytest.raises(ValidationError):
        conditional_displacement(1.0, -2.0, 1.0, 0.3, -0.1)


def test_calibration():
    assert calibrate_beta(0.0) == pytest.approx(0.62666, abs=1e-5)
    assert calibrate_beta(0.1) == pytest.approx(0.69088, abs=1e-4)
    assert calibrate_beta(0.0, iterated=True) == pytest.approx(np.sqrt(np.pi / 16), abs=1e-15)
    with pytest.raises(ValidationError):
        calibrate_beta(-1.0)


def test_cz_kernel_matches_closed_form(rng):
    for _ in range(200):
        beta_a, beta_b = rng.uniform(0.0, 2.0, size=2)
        l = rng.uniform(0.0, 0.5)
        report = cz_channel(beta_a, beta_b, l)
        assert report.closed_form_deviation <= 1e-12
        assert report.kernel.is_completely_positive()


def test_lossless_cz_is_exact():
    report = cz_channel(calibrate_beta(0.0), calibrate_beta(0.0), 0.0)
    _, fidelity, conc = gate_output(report.kernel)
    assert fidelity == pytest.approx(1.0, abs=1e-12)
    assert conc == pytest.approx(1.0, abs=1e-9)
    assert report.kappa == pytest.approx(np.pi / 4, abs=1e-15)


def channel_at_x3(x3, l=0.1):
    eta = 1 - np.exp(-2 * l)
    beta = np.sqrt(x3 / (eta * np.exp(-l)))
    return cz_channel(beta, beta, l)


def test_trace_preserving_identity():
    for x3 in np.linspace(0.0, 5.0, 51):
        r = channel_at_x3(x3)
        assert r.x3 == pytest.approx(x3, abs=1e-12)
        total = np.exp(-2 * r.x3) * (r.c_plus + r.c_minus + 2 * (r.s_plus + r.s_minus))
        assert total == pytest.approx(1.0, abs=1e-12)
        rest = np.exp(-2 * r.x3) * r.c_plus + r.correlated_weight + 2 * r.uncorrelated_weight
        assert rest == pytest.approx(1.0, abs=1e-12)


def test_weights_at_x3():
    assert cz_channel(1.0, 1.0, 0.0).x3 == 0.0
    r = channel_at_x3(0.3)
    assert r.c_plus + r.c_minus + 2 * (r.s_plus + r.s_minus) == pytest.approx(1.82212, abs=1e-5)
    assert r.c_minus == pytest.approx(0.5 * (np.cosh(0.6) - np.cos(0.6)), abs=1e-12)


def test_decomposition_reproduces_middle_overlap(rng, random_density):
    for _ in range(50):
        beta_a, beta_b = rng.uniform(0.1, 1.5, size=2)
        report = cz_channel(beta_a, beta_b, rng.uniform(0.0, 0.4))
        rho = random_density(4)
        mapped = apply_operator_sum(channel_decomposition(report), rho)
        assert np.max(np.abs(mapped - rho * xi2_kernel(report))) <= 1e-12


def test_symmetric_decomposition_has_four_terms():
    beta, l = 0.7, 0.2
    report = cz_channel(beta, beta * np.exp(-l), l)
    weights = {term.name: term.weight for term in channel_decomposition(report)}
    for name in ("Za", "Zb", "K'", "K'dag"):
        assert weights[name] == 0.0
    assert weights["J"] > weights["Jdag"] > 0


def test_correlated_weight_vanishes_at_low_loss():
    ratios = []
    for l in (1e-2, 1e-3, 1e-4):
        beta = calibrate_beta(l)
        report = cz_channel(beta, beta, l)
        ratios.append(report.correlated_weight / report.uncorrelated_weight)
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] < 1e-3


def test_low_loss_observable():
    lowloss = LowLossMap(0.01, 0.627)
    assert lowloss.weight == pytest.approx(3.93e-3, abs=1e-5)
    assert lowloss.observable == {"I": 1.0, "Za": lowloss.weight, "Zb": lowloss.weight}

    rho = np.full((4, 4), 0.25, dtype=complex)
    full = rho + lowloss.weight * J @ rho @ J.conj().T
    assert np.allclose(lowloss.apply_full(rho), full, atol=1e-15)
    dropped = lowloss.apply_full(rho) - lowloss.apply_observable(rho)
    w = lowloss.weight
    assert np.allclose(dropped, 1j * w * ZB @ rho @ ZA - 1j * w * ZA @ rho @ ZB, atol=1e-15)

    report = cz_channel(0.627, 0.627, 0.005)
    assert low_loss_observable(report).eta == report.eta


def test_process_matrix_of_identity_kernel():
    chi = process_matrix(np.ones((4, 4)))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.allclose(chi, expected, atol=1e-15)


def test_iterated_sequence_factorizes():
    for l in (0.0, 0.01, 0.05, 0.2):
        beta = calibrate_beta(l, iterated=True)
        report = iterated_cz(beta, beta, l)
        assert report.correlation_residual <= 1e-12
        assert report.coherent_residual <= 1e-12
        assert report.p_a == pytest.approx(report.p_a_closed, abs=1e-12)
        assert report.p_b == pytest.approx(report.p_b_closed, abs=1e-12)
        assert report.p_a == pytest.approx(report.p_b, abs=1e-12)
        assert report.kappa_total == pytest.approx(np.pi / 4, abs=1e-12)
        assert sum(report.pauli_probabilities.values()) == pytest.approx(1.0, abs=1e-12)


def test_iterated_sequence_with_unequal_amplitudes_factorizes():
    report = iterated_cz(0.5, 0.8, 0.2)
    assert report.correlation_residual <= 1e-12
    d = np.exp(-0.2)
    assert report.kappa_total == pytest.approx(2 * 0.5 * 0.8 * (d + d ** 3), abs=1e-14)


def test_combined_kernel_is_the_product_of_the_passes():
    for beta_a, beta_b, l in [(0.44, 0.44, 0.05), (0.5, 0.8, 0.2), (1.1, 0.3, 0.1)]:
        report = iterated_cz(beta_a, beta_b, l)
        passes = report.first_pass.g * report.second_pass.g
        assert np.max(np.abs(report.kernel.g - passes)) <= 1e-12


def test_inter_sequence_loss_does_not_touch_a_disentangled_probe():
    beta = calibrate_beta(0.05, iterated=True)
    plain = iterated_cz(beta, beta, 0.05)
    lossy = iterated_cz(beta, beta, 0.05, inter_sequence_loss=0.3)
    assert np.allclose(plain.kernel.g, lossy.kernel.g, atol=1e-14)


def test_loss_sweep_columns_and_reference_points():
    l_values = [l_from_l_tot(x) for x in (0.0, 0.05, 0.8)]
    frame = loss_sweep(l_values)
    assert frame["l_tot"].tolist() == pytest.approx([0.0, 0.05, 0.8], abs=1e-12)
    assert frame["loss_db"].tolist() == pytest.approx(
        [-10 * np.log10(1 - x) for x in (0.0, 0.05, 0.8)], abs=1e-9
    )
    assert frame["F"][0] == pytest.approx(1.0, abs=1e-12)
    assert frame["F"][1] == pytest.approx(0.97, abs=1e-2)
    assert frame["C"][1] == pytest.approx(0.95, abs=1e-2)
    assert frame["F"][2] >= 0.5
    assert frame["F_full"][2] < frame["F"][2]
    assert frame["F_full"][1] == pytest.approx(frame["F"][1], abs=1e-3)


def test_fidelity_and_concurrence_fall_with_loss():
    frame = loss_sweep([l_from_l_tot(x) for x in np.linspace(0.0, 0.9, 46)])
    assert np.all(np.diff(frame["F"]) <= 1e-12)
    assert np.all(np.diff(frame["C"]) <= 1e-12)


def test_observable_kernel_drops_only_the_cross_phase():
    for l_tot in (0.05, 0.3, 0.8):
        l = l_from_l_tot(l_tot)
        beta = calibrate_beta(l)
        report = cz_channel(beta, beta, l)
        kernel = observable_kernel(report.kernel, report.kappa)
        assert kernel.is_completely_positive()
        assert np.allclose(np.abs(kernel.g), np.abs(report.kernel.g), atol=1e-15)
        g = kernel.g / conditional_phase(report.kappa)
        assert np.allclose(g.imag, 0.0, atol=1e-12)
        assert np.all(g.real > 0)


def test_iterated_sweep():
    l_tots = (0.05, 0.1, 0.2, 0.3, 0.5)
    frame = loss_sweep([l_from_l_tot(x) for x in l_tots], iterated=True)
    assert np.all(frame["c_minus_norm"] <= 1e-12)
    assert np.all(frame["s_sum_norm"] <= 1e-12)
    assert frame["p_a"].tolist() == pytest.approx(frame["p_b"].tolist(), abs=1e-12)

    single = loss_sweep([l_from_l_tot(x) for x in l_tots])
    assert frame["F"].tolist() == pytest.approx(single["F"].tolist(), abs=1e-9)
    assert np.all(frame["C"] < single["C"])


def test_loss_sweep_rejects_negative_loss():
    with pytest.raises(ValidationError):
        loss_sweep([0.1, -0.1])
    with pytest.raises(ValidationError):
        l_from_l_tot(1.0)
