from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import block_diag, expm
from scipy.special import gammaln

from qubus.channels.steps import Displace, Interact, Loss, Rotate, apply_step
from qubus.state.hybridstate import (
    STRUCT_TOL,
    check_density,
    new_product_state,
    reduce_qubits,
    z_of,
)
from qubus.utils.errors import OracleError, ValidationError


# Truncated displacements lose accuracy fast beyond this amplitude
MAX_ORACLE_AMP = 3.0
NORM_TOL = 1e-10
TRACE_LEAK_TOL = 1e-6


def required_fock_dim(alpha):
    """Poisson mean plus ten standard deviations, plus a fixed margin."""
    a = abs(alpha)
    return int(np.ceil(a ** 2 + 10.0 * a + 20.0))


@dataclass(frozen=True)
class LindbladConfig:
    n_max: int
    chi: float
    gamma: float
    t: float
    dt_initial: Optional[float] = None
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11

    def __post_init__(self):
        if self.n_max < 1:
            raise ValidationError(f"Fock truncation must be >= 1, got {self.n_max}")
        if self.gamma < 0:
            raise ValidationError(f"damping rate gamma must be >= 0, got {self.gamma}")
        if self.t < 0:
            raise ValidationError(f"duration t must be >= 0, got {self.t}")
        if not 0 < self.rel_tol <= 1e-8:
            raise ValidationError(f"rel_tol must lie in (0, 1e-8], got {self.rel_tol}")

    def check_amplitude(self, alpha):
        needed = required_fock_dim(alpha)
        if self.n_max < needed:
            raise OracleError(
                f"Fock truncation {self.n_max} too small for amplitude {abs(alpha):.4g}, "
                f"need n_max >= {needed}"
            )
        return self


@dataclass(frozen=True, eq=False)
class JointFockState:
    """Register (x) truncated Fock density matrix, register index major."""

    n_qubits: int
    n_max: int
    rho: np.ndarray

    @property
    def dim(self):
        return 2 ** self.n_qubits * self.n_max

    def blocks(self):
        # (v, n, v', n') view
        d = 2 ** self.n_qubits
        return self.rho.reshape(d, self.n_max, d, self.n_max)

    def check(self, leak_tol=TRACE_LEAK_TOL):
        rho = self.rho
        if rho.shape != (self.dim, self.dim):
            raise OracleError(f"joint state shape {rho.shape} does not match {self.dim}")
        if np.max(np.abs(rho - rho.conj().T)) > STRUCT_TOL:
            raise OracleError("joint state lost Hermiticity")
        trace = np.trace(rho).real
        if not 1.0 - leak_tol <= trace <= 1.0 + STRUCT_TOL:
            raise OracleError(f"trace {trace:.12g} outside [1 - {leak_tol:g}, 1]")
        return self


def coherent_vector(alpha, n_max):
    """<n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < n_max."""
    alpha = complex(alpha)
    vec = np.zeros(n_max, dtype=complex)
    if alpha == 0:
        vec[0] = 1.0
        return vec
    n = np.arange(n_max)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    vec = np.exp(log_mag + 1j * n * np.angle(alpha))
    deficit = 1.0 - np.vdot(vec, vec).real
    if deficit > NORM_TOL:
        raise OracleError(
            f"Fock truncation {n_max} too small for amplitude {abs(alpha):.4g} "
            f"(norm deficit {deficit:.3g}), need n_max >= {required_fock_dim(alpha)}"
        )
    return vec


def annihilation(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max)), k=1).astype(complex)


def fock_displacement(beta, n_max):
    """exp(beta a^dag - conj(beta) a) on the truncated space."""
    a = annihilation(n_max)
    return expm(beta * a.conj().T - np.conj(beta) * a)


def joint_state(qubit_density, probe_amp, n_max):
    rho_q = check_density(qubit_density)
    n_qubits = int(round(np.log2(rho_q.shape[0])))
    probe = coherent_vector(probe_amp, n_max)
    return JointFockState(n_qubits, n_max, np.kron(rho_q, np.outer(probe, probe.conj())))


def reduce_probe(joint):
    """Partial trace over the Fock mode."""
    return np.einsum("anbn->ab", joint.blocks())


def integrate(rho0, config, target=0, lambdas=None, amplitude=None):
    """
    Integrate the zero-temperature master equation for H = -chi a^dag a Lambda.

    Lambda is diagonal on the register, given by `lambdas` (one eigenvalue per basis
    index) or by Z on `target`. The Hamiltonian is diagonal in (v, n), so the
    commutator is elementwise; damping is written directly on the (v, n, v', n') blocks.

    `amplitude`, the largest probe amplitude the state holds, is checked against the
    truncation when given.
    """
    if config.n_max != rho0.n_max:
        raise ValidationError(f"config truncation {config.n_max} does not match state {rho0.n_max}")
    if amplitude is not None:
        config.check_amplitude(amplitude)
    d = 2 ** rho0.n_qubits
    n_max = rho0.n_max
    lam = z_of(rho0.n_qubits, target) if lambdas is None else np.asarray(lambdas, dtype=float)
    if lam.shape != (d,):
        raise ValidationError(f"need {d} Lambda eigenvalues, got shape {lam.shape}")
    if config.t == 0.0:
        return rho0

    n = np.arange(n_max, dtype=float)
    energy = -config.chi * lam[:, None] * n[None, :]
    # -i (E(v,n) - E(v',n')) and -gamma (n + n')
    drift = -1j * (energy[:, :, None, None] - energy[None, None, :, :]) - config.gamma * (
        n[None, :, None, None] + n[None, None, None, :]
    )
    feed = 2.0 * config.gamma * np.sqrt(n[1:])[:, None] * np.sqrt(n[1:])[None, :]
    shape = (d, n_max, d, n_max)

    def rhs(_, y):
        rho = y.reshape(shape)
        out = drift * rho
        # 2 gamma a rho a^dag: (n, n') <- sqrt(n+1) sqrt(n'+1) rho(n+1, n'+1)
        out[:, :-1, :, :-1] += feed[None, :, None, :] * rho[:, 1:, :, 1:]
        return out.ravel()

    sol = solve_ivp(
        rhs,
        (0.0, config.t),
        rho0.rho.reshape(-1).astype(complex),
        method="RK45",
        rtol=config.rel_tol,
        atol=config.abs_tol,
        first_step=config.dt_initial,
        t_eval=[config.t],
    )
    if sol.status != 0:
        reached = sol.t[-1] if sol.t.size else 0.0
        raise OracleError(f"integration failed at t = {reached:.6g}: {sol.message}")

    rho = sol.y[:, -1].reshape(rho0.dim, rho0.dim)
    # Symmetrize away the integrator's antihermitian roundoff
    rho = 0.5 * (rho + rho.conj().T)
    return JointFockState(rho0.n_qubits, n_max, rho).check()


def _conjugate(joint, unitary):
    rho = unitary @ joint.rho @ unitary.conj().T
    return JointFockState(joint.n_qubits, joint.n_max, rho)


def apply_fock_displacement(joint, beta, target=None):
    """D(beta) on the probe, or D(beta Z_target) as a block-diagonal unitary."""
    d = 2 ** joint.n_qubits
    z = np.ones(d) if target is None else z_of(joint.n_qubits, target)
    cache = {s: fock_displacement(beta * s, joint.n_max) for s in set(z.tolist())}
    return _conjugate(joint, block_diag(*[cache[s] for s in z]))


def apply_fock_rotation(joint, theta, target):
    z = z_of(joint.n_qubits, target)
    n = np.arange(joint.n_max)
    phases = np.exp(1j * theta * z[:, None] * n[None, :]).ravel()
    rho = phases[:, None] * joint.rho * phases.conj()[None, :]
    return JointFockState(joint.n_qubits, joint.n_max, rho)


def apply_fock_step(joint, step, rel_tol=1e-9, amplitude=None):
    if isinstance(step, Displace):
        return apply_fock_displacement(joint, complex(step.amplitude), step.target)
    elif isinstance(step, Rotate):
        return apply_fock_rotation(joint, step.theta, step.target)
    elif isinstance(step, Loss):
        # Pure damping over unit rate for time l
        config = LindbladConfig(joint.n_max, 0.0, 1.0, step.l, rel_tol=rel_tol)
        return integrate(joint, config, amplitude=amplitude)
    elif isinstance(step, Interact):
        spec = step.spec
        config = LindbladConfig(joint.n_max, spec.chi, spec.gamma, spec.t, rel_tol=rel_tol)
        return integrate(joint, config, target=step.target, amplitude=amplitude)
    else:
        raise ValueError(f"Not a valid step: {step!r}")


def run_fock_sequence(joint, steps, rel_tol=1e-9, amplitude=None):
    for step in steps:
        joint = apply_fock_step(joint, step, rel_tol=rel_tol, amplitude=amplitude)
    return joint.check()


def engine_trajectory(qubit_density, probe_amp, steps):
    """Engine states after every step, starting with the input."""
    state = new_product_state(qubit_density, probe_amp)
    states = [state]
    for step in steps:
        state = apply_step(state, step)
        states.append(state)
    return states


@dataclass(frozen=True)
class OracleComparison:
    deviation: float
    n_max: int
    max_amplitude: float
    engine_density: np.ndarray
    oracle_density: np.ndarray


def compare_with_engine(steps, qubit_density=None, probe_amp=0.0, rel_tol=1e-9):
    """Run the branch engine and the Fock evolution side by side on one scenario."""
    n_qubits = getattr(steps, "n_qubits", 1)
    if qubit_density is None:
        d = 2 ** n_qubits
        qubit_density = np.full((d, d), 1.0 / d, dtype=complex)

    states = engine_trajectory(qubit_density, probe_amp, steps)
    largest = max(
        float(np.max(np.abs(np.concatenate([s.ket_amp.ravel(), s.bra_amp.ravel()]))))
        for s in states
    )
    # Every displacement generator acts on the amplitude before it as well
    for step in steps:
        if isinstance(step, Displace):
            largest = max(largest, abs(complex(step.amplitude)))
    if largest > MAX_ORACLE_AMP:
        raise OracleError(
            f"amplitude {largest:.4g} exceeds {MAX_ORACLE_AMP} along the sequence, "
            "Fock truncation is infeasible"
        )

    n_max = required_fock_dim(largest)
    joint = joint_state(qubit_density, probe_amp, n_max)
    joint = run_fock_sequence(joint, steps, rel_tol, amplitude=largest)

    engine = reduce_qubits(states[-1])
    oracle = reduce_probe(joint)
    return OracleComparison(
        deviation=float(np.max(np.abs(engine - oracle))),
        n_max=n_max,
        max_amplitude=largest,
        engine_density=engine,
        oracle_density=oracle,
    )