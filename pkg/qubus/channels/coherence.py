from dataclasses import dataclass

import numpy as np

from qubus.state.hybridstate import cross_imag, z_of
from qubus.utils.errors import ValidationError


# Below this damping rate the lossless (unitary) limit is used
GAMMA_FLOOR = 1e-300


@dataclass(frozen=True)
class CouplingSpec:
    """
    Dispersive coupling H = -hbar chi a^dag a Lambda, with probe damping gamma for time t.

    `lambda_n`, `lambda_m` are the eigenvalues of Lambda on the ket and bra signal
    states used by scalar evaluations; (+1, -1) is Lambda = Z between |0> and |1>.
    """

    chi: float
    gamma: float
    t: float
    lambda_n: int = 1
    lambda_m: int = -1

    def __post_init__(self):
        if not np.isfinite(self.chi):
            raise ValidationError("coupling chi must be real and finite")
        if self.gamma < 0:
            raise ValidationError(f"damping rate gamma must be >= 0, got {self.gamma}")
        if self.t < 0:
            raise ValidationError(f"duration t must be >= 0, got {self.t}")

    @property
    def is_z(self):
        return self.lambda_n in (1, -1) and self.lambda_m in (1, -1)

    @property
    def delta(self):
        return self.lambda_n - self.lambda_m

    @property
    def eta(self):
        return -np.expm1(-2.0 * self.gamma * self.t)


def coherence_exponent(ket_amp, bra_amp, chi, gamma, t, lambda_n, lambda_m):
    """
    Log of the factor an element |A><B| picks up under the damped dispersive coupling.

    Exact solution of the zero-temperature master equation for arbitrary coherent
    amplitudes; for A == B == alpha it is the exponent of the coherence parameter.
    The arguments broadcast, so a whole branch array is handled in one call.
    """
    if gamma < GAMMA_FLOOR:
        return np.zeros(np.broadcast(ket_amp, bra_amp, lambda_n, lambda_m).shape, dtype=complex)

    ket_amp = np.asarray(ket_amp, dtype=complex)
    bra_amp = np.asarray(bra_amp, dtype=complex)
    delta = np.asarray(lambda_n, dtype=float) - np.asarray(lambda_m, dtype=float)

    # 1 - e^{-2 gamma t} and 1 - e^{(-2 gamma + i delta chi) t}, both without cancellation
    loss = -np.expm1(-2.0 * gamma * t)
    rotated = -np.expm1((-2.0 * gamma + 1j * delta * chi) * t)
    # 2 gamma / (2 gamma - i delta chi) == 1 / (1 - i delta chi / 2 gamma)
    weight = 2.0 * gamma / (2.0 * gamma - 1j * delta * chi)

    # Regrouped so populations (equal amplitudes, delta = 0) get exactly zero
    return (
        -0.5 * np.abs(ket_amp - bra_amp) ** 2 * loss
        + 1j * cross_imag(bra_amp, ket_amp) * loss
        + np.conj(bra_amp) * ket_amp * (weight * rotated - loss)
    )


def coherence_parameter(alpha, spec):
    """zeta_nm for a probe starting in |alpha>, evaluated in the exponent."""
    f = coherence_exponent(alpha, alpha, spec.chi, spec.gamma, spec.t, spec.lambda_n, spec.lambda_m)
    return complex(np.exp(f))


def coherence_limit(alpha, gamma_over_chi, delta):
    """|zeta_nm| as t -> infinity for a fixed amplitude."""
    if gamma_over_chi <= 0:
        raise ValidationError(f"gamma/chi must be > 0, got {gamma_over_chi}")
    if np.isinf(gamma_over_chi):
        return 1.0
    delta = float(delta)
    return float(
        np.exp(-abs(alpha) ** 2 * delta ** 2 / (4.0 * gamma_over_chi ** 2 + delta ** 2))
    )


def coherence_split(alpha, spec):
    """
    Real (dephasing) and imaginary (known phase) parts of the exponent for Lambda = Z.

    The gamma sin(2 chi t) term of the phase carries the e^{-2 gamma t} damping;
    with it, exp(re + i im) reproduces the coherence parameter exactly.
    """
    if not spec.is_z:
        raise ValidationError("coherence_split needs Lambda = Z eigenvalues (+1/-1)")

    chi, gamma, t = spec.chi, spec.gamma, spec.t
    z_n, z_m = spec.lambda_n, spec.lambda_m
    norm = gamma ** 2 + chi ** 2
    if norm == 0.0:
        return 0.0, 0.0

    a2 = abs(alpha) ** 2
    decay = np.exp(-2.0 * gamma * t)
    loss = -np.expm1(-2.0 * gamma * t)
    theta = chi * t

    re = (
        -a2
        / (2.0 * norm)
        * (
            chi ** 2 * loss
            - 2.0 * gamma ** 2 * decay * np.sin(theta) ** 2
            - chi * gamma * decay * np.sin(2.0 * theta)
        )
        * (1 - z_n * z_m)
    )
    im = (
        gamma
        * a2
        / (2.0 * norm)
        * (chi * (1.0 - decay * np.cos(2.0 * theta)) - gamma * decay * np.sin(2.0 * theta))
        * (z_n - z_m)
    )
    return float(re), float(im)


def dephasing_limit(alpha, gamma_over_chi, z_n=1, z_m=-1):
    """e^{Re f} as t -> infinity: the fixed dephasing left once the probe is empty."""
    if gamma_over_chi < 0:
        raise ValidationError(f"gamma/chi must be >= 0, got {gamma_over_chi}")
    return float(
        np.exp(-abs(alpha) ** 2 / (2.0 * (1.0 + gamma_over_chi ** 2)) * (1 - z_n * z_m))
    )


@dataclass(frozen=True)
class PhaseFlipChannel:
    epsilon: float

    @property
    def p_keep(self):
        return 0.5 * (1.0 + np.exp(-2.0 * self.epsilon))

    @property
    def p_flip(self):
        # (1 - e^{-2 eps}) / 2 without cancellation for small eps
        return -0.5 * np.expm1(-2.0 * self.epsilon)

    def apply(self, rho, target=0):
        """p_keep rho + p_flip Z rho Z on qubit `target`."""
        rho = np.asarray(rho, dtype=complex)
        n_qubits = int(round(np.log2(rho.shape[0])))
        z = z_of(n_qubits, target)
        return self.p_keep * rho + self.p_flip * (z[:, None] * rho * z[None, :])

    def multiplier(self, n_qubits=1, target=0):
        # Elementwise form e^{-eps (1 - z z')}
        z = z_of(n_qubits, target)
        return np.exp(-self.epsilon * (1 - np.outer(z, z)))


def phase_flip_decompose(epsilon):
    if epsilon < 0:
        raise ValidationError(f"dephasing exponent must be >= 0, got {epsilon}")
    return PhaseFlipChannel(float(epsilon))
