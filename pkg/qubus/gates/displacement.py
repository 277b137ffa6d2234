from dataclasses import dataclass

import numpy as np

from qubus.channels.steps import Displace, Loss, Rotate, SequenceSpec, run_sequence
from qubus.state.hybridstate import new_product_state, plus_state
from qubus.utils.errors import ValidationError


@dataclass(frozen=True)
class CondDispReport:
    alpha1: float
    alpha2: float
    alpha3: float
    theta: float
    l: float
    # z-independent and z-proportional parts of the final probe amplitude
    residual: complex
    effective_beta: complex
    S: float
    T: float
    # T exactly as printed alongside S; the third overlap enters it with the wrong sign
    T_printed: float
    geo_phase: float
    eta: float
    # Engine values on the |0><1| coefficient: e^{-dephasing (1 - zz') + i phase (z - z')}
    engine_dephasing: float
    engine_phase: float

    @property
    def closed_dephasing(self):
        return self.eta * self.S

    @property
    def closed_phase(self):
        return self.geo_phase + self.eta * self.T

    @property
    def printed_phase(self):
        return self.geo_phase + self.eta * self.T_printed

    def phase_deviation(self, printed=False):
        # Phases can reach thousands of radians; the engine only knows them modulo pi
        closed = self.printed_phase if printed else self.closed_phase
        return float(abs(np.angle(np.exp(2j * (self.engine_phase - closed)))) / 2.0)


def lossless_amplitudes(alpha, theta):
    """
    Displacements of the exact lossless sequence
    D(alpha cos) R(-theta Z) D(-2 alpha) R(theta Z) D(alpha cos).
    """
    return alpha * np.cos(theta), -2.0 * alpha, alpha * np.cos(theta)


def closing_alpha3(alpha1, alpha2, theta, l):
    """Last displacement that removes the z-independent part of the probe amplitude."""
    return -(alpha1 * np.exp(-4.0 * l) + alpha2 * np.exp(-2.0 * l) * np.cos(theta))


def conditional_displacement_sequence(alpha1, alpha2, alpha3, theta, l, target=0, n_qubits=1):
    return SequenceSpec(
        n_qubits,
        [
            Displace(alpha1),
            Loss(l),
            Rotate(target, theta),
            Loss(l),
            Displace(alpha2),
            Loss(l),
            Rotate(target, -theta),
            Loss(l),
            Displace(alpha3),
        ],
    )


def conditional_displacement(alpha1, alpha2, alpha3, theta, l):
    """
    Simulate the conditional displacement with a loss segment after every step.

    The nine-step sequence runs through the branch engine on a qubit in |+>, and the
    closed forms for the dephasing S and phase T are evaluated next to it.
    """
    if l < 0:
        raise ValidationError(f"loss l must be >= 0, got {l}")
    alpha1, alpha2, alpha3 = float(alpha1), float(alpha2), float(alpha3)

    state = run_sequence(
        new_product_state(plus_state(1), 0.0),
        conditional_displacement_sequence(alpha1, alpha2, alpha3, theta, l),
    )
    amp0, amp1 = state.ket_amp[0, 0], state.ket_amp[1, 1]
    log_ratio = np.log(state.coeff[0, 1] / 0.5)

    d = np.exp(-l)
    a1_1, a1_2, a1_3 = alpha1 * d, alpha1 * d ** 2, alpha1 * d ** 3
    a2_1, a2_2 = alpha2 * d, alpha2 * d ** 2
    sin, cos = np.sin(theta), np.cos(theta)

    S = sin ** 2 * (a1_1 ** 2 + a1_2 ** 2 + a2_1 ** 2)
    T = sin * (a1_2 * alpha2 - a1_3 * a2_1 + (a1_1 ** 2 + a1_2 ** 2 - a2_1 ** 2) * cos)
    T_printed = sin * (a1_2 * alpha2 + a1_3 * a2_1 + (a1_1 ** 2 + a1_2 ** 2 + a2_1 ** 2) * cos)
    geo = sin * (a2_2 * alpha3 - a1_2 * alpha2)

    return CondDispReport(
        alpha1=alpha1,
        alpha2=alpha2,
        alpha3=alpha3,
        theta=float(theta),
        l=float(l),
        residual=complex(0.5 * (amp0 + amp1)),
        effective_beta=complex(0.5 * (amp0 - amp1)),
        S=float(S),
        T=float(T),
        T_printed=float(T_printed),
        geo_phase=float(geo),
        eta=float(-np.expm1(-2.0 * l)),
        # (1 - z z') = 2 and (z - z') = 2 on the |0><1| branch
        engine_dephasing=float(-log_ratio.real / 2.0),
        engine_phase=float(log_ratio.imag / 2.0),
    )
