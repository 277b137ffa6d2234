from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from qubus.channels.coherence import CouplingSpec, coherence_exponent
from qubus.state.hybridstate import log_overlap, z_of
from qubus.utils.errors import StepError, ValidationError


@dataclass(frozen=True)
class Displace:
    """D(beta), or D(beta Z_target) when a target qubit is given."""

    amplitude: complex
    target: Optional[int] = None


@dataclass(frozen=True)
class Rotate:
    """R(theta Z_target) = exp(i theta a^dag a Z_target)."""

    target: int
    theta: float


@dataclass(frozen=True)
class Loss:
    """Probe damping by amplitude factor e^{-l}."""

    l: float


@dataclass(frozen=True)
class Interact:
    spec: CouplingSpec
    target: int


Step = Union[Displace, Rotate, Loss, Interact]


@dataclass(frozen=True)
class SequenceSpec:
    n_qubits: int
    steps: Tuple[Step, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def _check_target(state, target):
    if target is None:
        return
    if not 0 <= target < state.n_qubits:
        raise ValidationError(f"target {target} out of range for {state.n_qubits} qubits")


def _ket_bra_z(state, target):
    # z of the target on the ket (rows) and on the bra (columns)
    z = z_of(state.n_qubits, target)
    return z[:, None], z[None, :]


def apply_displacement(state, step):
    _check_target(state, step.target)
    beta = complex(step.amplitude)
    if step.target is None:
        z_ket, z_bra = 1.0, 1.0
    else:
        z_ket, z_bra = _ket_bra_z(state, step.target)

    shift_ket = beta * z_ket
    shift_bra = beta * z_bra
    # D(b)|a> = e^{i Im(conj(a) b)} |a + b>, conjugated on the bra side
    phase = np.imag(np.conj(state.ket_amp) * shift_ket) - np.imag(
        np.conj(state.bra_amp) * shift_bra
    )
    return state.replace(
        coeff=state.coeff * np.exp(1j * phase),
        ket_amp=state.ket_amp + shift_ket,
        bra_amp=state.bra_amp + shift_bra,
    )


def apply_rotation(state, step):
    _check_target(state, step.target)
    z_ket, z_bra = _ket_bra_z(state, step.target)
    return state.replace(
        ket_amp=state.ket_amp * np.exp(1j * step.theta * z_ket),
        bra_amp=state.bra_amp * np.exp(1j * step.theta * z_bra),
    )


def apply_loss(state, step):
    if step.l < 0:
        raise ValidationError(f"loss l must be >= 0, got {step.l}")
    eta = -np.expm1(-2.0 * step.l)
    # Overlap at the amplitudes entering the loss segment
    factor = np.exp(eta * log_overlap(state.bra_amp, state.ket_amp))
    damping = np.exp(-step.l)
    return state.replace(
        coeff=state.coeff * factor,
        ket_amp=state.ket_amp * damping,
        bra_amp=state.bra_amp * damping,
    )


def apply_interaction(state, spec, target):
    _check_target(state, target)
    if not spec.is_z:
        raise ValidationError("branch engine supports Lambda = Z on a qubit only")
    z_ket, z_bra = _ket_bra_z(state, target)

    f = coherence_exponent(
        state.ket_amp, state.bra_amp, spec.chi, spec.gamma, spec.t, z_ket, z_bra
    )
    return state.replace(
        coeff=state.coeff * np.exp(f),
        ket_amp=state.ket_amp * np.exp((-spec.gamma + 1j * z_ket * spec.chi) * spec.t),
        bra_amp=state.bra_amp * np.exp((-spec.gamma + 1j * z_bra * spec.chi) * spec.t),
    )


def apply_step(state, step):
    if isinstance(step, Displace):
        return apply_displacement(state, step)
    elif isinstance(step, Rotate):
        return apply_rotation(state, step)
    elif isinstance(step, Loss):
        return apply_loss(state, step)
    elif isinstance(step, Interact):
        return apply_interaction(state, step.spec, step.target)
    else:
        raise ValueError(f"Not a valid step: {step!r}")


def run_sequence(state, steps):
    """Apply the steps left to right; the first invalid step aborts with its index."""
    if isinstance(steps, SequenceSpec) and steps.n_qubits != state.n_qubits:
        raise ValidationError(
            f"sequence is for {steps.n_qubits} qubits, state has {state.n_qubits}"
        )
    for i, step in enumerate(steps):
        try:
            state = apply_step(state, step)
        except ValueError as e:
            raise StepError(i, str(e)) from e
        state.check()
    return state
