from dataclasses import dataclass

import numpy as np
import pandas as pd

from qubus.channels.steps import Displace, Loss, SequenceSpec, run_sequence
from qubus.measures.entanglement import concurrence, fidelity_pure
from qubus.state.hybridstate import (
    IDENTITY_TOL,
    DephasingKernel,
    apply_kernel,
    log_overlap,
    new_product_state,
    observed_kernel,
    plus_state,
    z_values,
)
from qubus.utils.errors import ValidationError


# Two-qubit diagonal operators, basis index v = 2 a + b
Z2 = z_values(2)
I4 = np.eye(4, dtype=complex)
ZA = np.diag(Z2[:, 0]).astype(complex)
ZB = np.diag(Z2[:, 1]).astype(complex)
K = ZA @ ZB
K_PRIME = 1j * I4 + K
J = ZA + 1j * ZB
# Rows are the eigenvalue vectors of I, Z_a, Z_b, Z_a Z_b
PAULI_DIAG = np.array([np.ones(4), Z2[:, 0], Z2[:, 1], Z2[:, 0] * Z2[:, 1]], dtype=float)
PAULI_NAMES = ("I", "Za", "Zb", "K")


def cz_target_state():
    """e^{i pi Z_a Z_b / 4} |++>."""
    return 0.5 * np.exp(1j * np.pi / 4 * Z2[:, 0] * Z2[:, 1])


def _eta(l):
    return -np.expm1(-2.0 * l)


def cz_sequence(beta_a, beta_b, l, swapped=False):
    """
    The four conditional displacements with a loss segment between each.

    The second displacement of each qubit is scaled by e^{-2l} so the probe closes
    its loop. With `swapped`, qubit b leads along the real axis and qubit a follows
    along the imaginary axis, which keeps the loop orientation (and the phase) while
    reversing the cross term of the middle overlap, for any beta_a and beta_b.
    """
    if l < 0:
        raise ValidationError(f"loss l must be >= 0, got {l}")
    shrink = np.exp(-2.0 * l)
    if not swapped:
        steps = [
            Displace(beta_a, 0),
            Loss(l),
            Displace(1j * beta_b, 1),
            Loss(l),
            Displace(-beta_a * shrink, 0),
            Loss(l),
            Displace(-1j * beta_b * shrink, 1),
        ]
    else:
        steps = [
            Displace(beta_b, 1),
            Loss(l),
            Displace(1j * beta_a, 0),
            Loss(l),
            Displace(-beta_b * shrink, 1),
            Loss(l),
            Displace(-1j * beta_a * shrink, 0),
        ]
    return SequenceSpec(2, steps)


def kernel_of(sequence, tol=IDENTITY_TOL):
    """Run a diagonal sequence from |++> (x) vacuum and read off its kernel."""
    rho0 = plus_state(sequence.n_qubits)
    state = run_sequence(new_product_state(rho0, 0.0), sequence)
    amps = np.concatenate([state.ket_amp.ravel(), state.bra_amp.ravel()])
    spread = float(np.max(np.abs(amps - amps[0])))
    if spread > tol:
        raise ValidationError(f"probe did not disentangle (amplitude spread {spread:.3g})")
    return DephasingKernel(sequence.n_qubits, observed_kernel(state, rho0)), spread


def conditional_phase(kappa):
    """Elementwise e^{i kappa (z_a z_b - z_a' z_b')}."""
    zz = Z2[:, 0] * Z2[:, 1]
    return np.exp(1j * kappa * (zz[:, None] - zz[None, :]))


def xi2_log(beta_a, beta_b, l):
    """eta log xi_2: loss while the probe holds both qubits, as a 4x4 exponent."""
    d = np.exp(-l)
    amp = beta_a * d * Z2[:, 0] + 1j * beta_b * Z2[:, 1]
    return _eta(l) * log_overlap(amp[None, :], amp[:, None])


def cz_kernel_closed(beta_a, beta_b, l):
    eta = _eta(l)
    d = np.exp(-l)
    za, zb = Z2[:, 0], Z2[:, 1]
    xi1 = -beta_a ** 2 * (1 - np.outer(za, za))
    xi3 = -((beta_b * d) ** 2) * (1 - np.outer(zb, zb))
    kappa = beta_a * d * beta_b + beta_a * d ** 2 * beta_b * d
    return conditional_phase(kappa) * np.exp(eta * (xi1 + xi3) + xi2_log(beta_a, beta_b, l))


@dataclass(frozen=True)
class CZChannelReport:
    beta_a: float
    beta_b: float
    l: float
    eta: float
    kappa: float
    kernel: DephasingKernel
    x0: float
    x1: float
    x2: float
    x3: float
    c_plus: float
    c_minus: float
    s_plus: float
    s_minus: float
    e0: float
    e1: float
    e2: float
    e3: float
    # Correlated e^{-2 x3} c_- and uncorrelated e^{-2 x3} (s_+ + s_-) flip weights
    correlated_weight: float
    uncorrelated_weight: float
    closed_form_deviation: float
    disentangle_spread: float

    @property
    def l_tot(self):
        return -np.expm1(-6.0 * self.l)


def cz_channel(beta_a, beta_b, l):
    beta_a, beta_b, l = float(beta_a), float(beta_b), float(l)
    kernel, spread = kernel_of(cz_sequence(beta_a, beta_b, l))
    kernel.check()

    eta = _eta(l)
    d = np.exp(-l)
    ba1 = beta_a * d
    kappa = ba1 * beta_b + beta_a * d ** 2 * beta_b * d

    x0 = eta * (ba1 ** 2 + beta_b ** 2)
    x1 = eta * ba1 * (ba1 - beta_b)
    x2 = eta * beta_b * (beta_b - ba1)
    x3 = eta * ba1 * beta_b
    c_plus = 0.5 * (np.cosh(2 * x3) + np.cos(2 * x3))
    c_minus = 0.5 * (np.cosh(2 * x3) - np.cos(2 * x3))
    s_plus = 0.25 * (np.sinh(2 * x3) + np.sin(2 * x3))
    s_minus = 0.25 * (np.sinh(2 * x3) - np.sin(2 * x3))
    norm = np.exp(-2 * x3)

    deviation = float(np.max(np.abs(kernel.g - cz_kernel_closed(beta_a, beta_b, l))))
    return CZChannelReport(
        beta_a=beta_a,
        beta_b=beta_b,
        l=l,
        eta=float(eta),
        kappa=float(kappa),
        kernel=kernel,
        x0=float(x0),
        x1=float(x1),
        x2=float(x2),
        x3=float(x3),
        c_plus=float(c_plus),
        c_minus=float(c_minus),
        s_plus=float(s_plus),
        s_minus=float(s_minus),
        e0=float(np.cosh(x1) * np.cosh(x2)),
        e1=float(np.cosh(x1) * np.sinh(x2)),
        e2=float(np.sinh(x1) * np.cosh(x2)),
        e3=float(np.sinh(x1) * np.sinh(x2)),
        correlated_weight=float(norm * c_minus),
        uncorrelated_weight=float(norm * (s_plus + s_minus)),
        closed_form_deviation=deviation,
        disentangle_spread=spread,
    )


@dataclass(frozen=True)
class OperatorSumTerm:
    name: str
    weight: float
    operator: np.ndarray


def channel_decomposition(report):
    """
    Operator-sum form of the middle-overlap channel xi_2^eta: rho -> sum w L rho L^dag.

    JrhoJ^dag is the first-order term of the expansion, so it carries s_+ e0 + s_- e3.
    With beta_b equal to the damped beta_a the Z_a, Z_b and K' weights vanish.
    """
    r = report
    scale = np.exp(-r.x0)
    return [
        OperatorSumTerm("I", scale * (r.c_plus * r.e0 + r.c_minus * r.e3), I4),
        OperatorSumTerm("Za", scale * (r.c_plus * r.e2 + r.c_minus * r.e1), ZA),
        OperatorSumTerm("Zb", scale * (r.c_plus * r.e1 + r.c_minus * r.e2), ZB),
        OperatorSumTerm("K", scale * (r.c_plus * r.e3 + r.c_minus * r.e0), K),
        OperatorSumTerm("K'", scale * (r.s_plus * r.e1 + r.s_minus * r.e2), K_PRIME),
        OperatorSumTerm("K'dag", scale * (r.s_plus * r.e2 + r.s_minus * r.e1), K_PRIME.conj().T),
        OperatorSumTerm("J", scale * (r.s_plus * r.e0 + r.s_minus * r.e3), J),
        OperatorSumTerm("Jdag", scale * (r.s_minus * r.e0 + r.s_plus * r.e3), J.conj().T),
    ]


def apply_operator_sum(terms, rho):
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for term in terms:
        if term.weight != 0.0:
            out += term.weight * term.operator @ rho @ term.operator.conj().T
    return out


def xi2_kernel(report):
    return np.exp(xi2_log(report.beta_a, report.beta_b, report.l))


@dataclass(frozen=True)
class LowLossMap:
    """First-order map rho + eta beta^2 J rho J^dag, split into its observable part."""

    eta: float
    beta: float

    @property
    def weight(self):
        return self.eta * self.beta ** 2

    @property
    def observable(self):
        # Left as unnormalized weights of rho, Z_a rho Z_a, Z_b rho Z_b
        return {"I": 1.0, "Za": self.weight, "Zb": self.weight}

    @property
    def cross_terms(self):
        # i w Z_b rho Z_a - i w Z_a rho Z_b: unobservable under syndrome measurement
        return [("Zb", "Za", 1j * self.weight), ("Za", "Zb", -1j * self.weight)]

    def apply_observable(self, rho):
        rho = np.asarray(rho, dtype=complex)
        return rho + self.weight * (ZA @ rho @ ZA + ZB @ rho @ ZB)

    def apply_full(self, rho):
        rho = np.asarray(rho, dtype=complex)
        ops = {"Za": ZA, "Zb": ZB}
        out = self.apply_observable(rho)
        for left, right, w in self.cross_terms:
            out = out + w * ops[left] @ rho @ ops[right]
        return out


def low_loss_observable(report, eta=None):
    """Truncate the symmetric channel at first order in eta and keep the observable part."""
    eta = report.eta if eta is None else eta
    return LowLossMap(float(eta), float(report.beta_b))


def calibrate_beta(l, iterated=False):
    """beta_a = beta_b such that the conditional phase totals pi/4."""
    if l < 0:
        raise ValidationError(f"loss l must be >= 0, got {l}")
    damping = np.exp(-l) + np.exp(-3.0 * l)
    if iterated:
        return float(np.sqrt(np.pi / (8.0 * damping)))
    return float(0.5 * np.sqrt(np.pi / damping))


def process_matrix(g):
    """chi_PQ over {I, Z_a, Z_b, K} with g(v, v') = sum chi_PQ p(v) q(v')."""
    g = np.asarray(g, dtype=complex)
    return PAULI_DIAG @ g @ PAULI_DIAG.T / 16.0


@dataclass(frozen=True)
class IteratedReport:
    beta_a: float
    beta_b: float
    l: float
    inter_sequence_loss: float
    kappa_total: float
    kernel: DephasingKernel
    first_pass: DephasingKernel
    second_pass: DephasingKernel
    kernel_a: np.ndarray
    kernel_b: np.ndarray
    p_a: float
    p_b: float
    p_a_closed: float
    p_b_closed: float
    # max |g - phase * (g_a (x) g_b)|: the non-factorizing (correlated) remainder
    correlation_residual: float
    # largest off-diagonal process-matrix element once the phase is removed
    coherent_residual: float
    disentangle_spread: float

    @property
    def pauli_probabilities(self):
        """Weights of rho, Z_a rho Z_a, Z_b rho Z_b, K rho K in the product channel."""
        pa, pb = self.p_a, self.p_b
        return {
            "I": (1 - pa) * (1 - pb),
            "Za": pa * (1 - pb),
            "Zb": (1 - pa) * pb,
            "K": pa * pb,
        }


def iterated_cz(beta_a, beta_b, l, inter_sequence_loss=0.0):
    """
    The sequence followed by its axis-swapped partner.

    The cross terms of the two middle overlaps cancel, leaving the conditional phase
    2 kappa and independent dephasing of each qubit.
    """
    beta_a, beta_b, l = float(beta_a), float(beta_b), float(l)
    if inter_sequence_loss < 0:
        raise ValidationError(f"inter-sequence loss must be >= 0, got {inter_sequence_loss}")

    first = cz_sequence(beta_a, beta_b, l)
    second = cz_sequence(beta_a, beta_b, l, swapped=True)
    between = [Loss(inter_sequence_loss)] if inter_sequence_loss > 0 else []
    combined = SequenceSpec(2, list(first.steps) + between + list(second.steps))

    kernel, spread = kernel_of(combined)
    kernel.check()
    first_kernel, _ = kernel_of(first)
    second_kernel, _ = kernel_of(second)

    d = np.exp(-l)
    kappa_first = beta_a * d * beta_b + beta_a * d ** 2 * beta_b * d
    kappa_second = beta_b * d * beta_a + beta_b * d ** 2 * beta_a * d
    kappa_total = kappa_first + kappa_second

    g = kernel.g / conditional_phase(kappa_total)
    # v = 2a + b: qubit a varies with b = 0 fixed, and vice versa
    kernel_a = g[np.ix_([0, 2], [0, 2])]
    kernel_b = g[np.ix_([0, 1], [0, 1])]
    product = np.kron(kernel_a, kernel_b)
    chi = process_matrix(g)

    eta = _eta(l)
    return IteratedReport(
        beta_a=beta_a,
        beta_b=beta_b,
        l=l,
        inter_sequence_loss=float(inter_sequence_loss),
        kappa_total=float(kappa_total),
        kernel=kernel,
        first_pass=first_kernel,
        second_pass=second_kernel,
        kernel_a=kernel_a,
        kernel_b=kernel_b,
        p_a=float(0.5 * (1.0 - kernel_a[0, 1].real)),
        p_b=float(0.5 * (1.0 - kernel_b[0, 1].real)),
        p_a_closed=float(-0.5 * np.expm1(-4.0 * eta * (beta_a ** 2 + (beta_a * d) ** 2))),
        p_b_closed=float(-0.5 * np.expm1(-4.0 * eta * (beta_b ** 2 + (beta_b * d) ** 2))),
        correlation_residual=float(np.max(np.abs(g - product))),
        coherent_residual=float(np.max(np.abs(chi - np.diag(np.diag(chi))))),
        disentangle_spread=spread,
    )


def observable_kernel(kernel, kappa):
    """
    Kernel with the cross phase dropped and the conditional phase kappa kept.

    A Z-basis syndrome only sees the moduli of g e^{-i kappa (z_a z_b - z_a' z_b')};
    the remaining phase comes from the i w Z_b rho Z_a type cross terms.
    """
    phase = conditional_phase(kappa)
    return DephasingKernel(kernel.n_qubits, phase * np.abs(kernel.g / phase))


def gate_output(kernel):
    """Output for the |++> input and its fidelity/concurrence against the ideal CZ state."""
    rho = apply_kernel(plus_state(2), kernel)
    return rho, fidelity_pure(rho, cz_target_state()), concurrence(rho)


def loss_row(l, iterated=False):
    l = float(l)
    l_tot = float(-np.expm1(-6.0 * l))
    beta = calibrate_beta(l, iterated=iterated)

    if iterated:
        report = iterated_cz(beta, beta, l)
        kappa = report.kappa_total
        chi = process_matrix(report.kernel.g / conditional_phase(kappa))
        # Correlated part: K weight beyond the product of independent flips
        c_minus_norm = abs(chi[3, 3].real - report.p_a * report.p_b)
        s_sum_norm = report.coherent_residual
        p_a, p_b = report.p_a, report.p_b
    else:
        report = cz_channel(beta, beta, l)
        kappa = report.kappa
        c_minus_norm = report.correlated_weight
        s_sum_norm = report.uncorrelated_weight
        g = report.kernel.g
        # Marginal flip probabilities from the single-qubit coherences
        p_a = 0.5 * (1.0 - abs(g[2, 0]))
        p_b = 0.5 * (1.0 - abs(g[1, 0]))

    _, fidelity, _ = gate_output(observable_kernel(report.kernel, kappa))
    _, fidelity_full, conc = gate_output(report.kernel)
    return {
        "l": l,
        "l_tot": l_tot,
        "loss_db": 60.0 * l / np.log(10.0),
        "beta": beta,
        "F": fidelity,
        "F_full": fidelity_full,
        "C": conc,
        "c_minus_norm": float(c_minus_norm),
        "s_sum_norm": float(s_sum_norm),
        "p_a": float(p_a),
        "p_b": float(p_b),
    }


def loss_sweep(l_grid, iterated=False):
    """Fidelity, concurrence and error weights of the calibrated gate over a loss grid."""
    l_grid = np.asarray(l_grid, dtype=float)
    if np.any(l_grid < 0):
        raise ValidationError("loss values must be >= 0")
    return pd.DataFrame([loss_row(l, iterated=iterated) for l in l_grid])


def l_from_l_tot(l_tot):
    """Invert l_tot = 1 - e^{-6 l}."""
    if not 0 <= l_tot < 1:
        raise ValidationError(f"l_tot must lie in [0, 1), got {l_tot}")
    return float(-np.log1p(-l_tot) / 6.0)
