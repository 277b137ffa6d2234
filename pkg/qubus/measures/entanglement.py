from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from qubus.channels.coherence import CouplingSpec, coherence_parameter
from qubus.state.hybridstate import STRUCT_TOL, check_density
from qubus.utils.errors import ValidationError


# Eigenvalues below this are treated as zero before logs and square roots
EIG_CLAMP = 1e-12

YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class PeakReport:
    alpha: float
    gamma_over_chi: float
    t_star: float
    c_max: float
    entropy_at_peak: float


def _log_delta(alpha, chi, gamma, t):
    # log |<alpha_1|alpha_0>| = -alpha^2 e^{-2 gamma t} (1 - cos 2 chi t)
    return -2.0 * alpha ** 2 * np.exp(-2.0 * gamma * t) * np.sin(chi * t) ** 2


def orthogonalize(alpha, chi, gamma, t):
    """
    Qubit (x) probe state after the lossy interaction, written as a two-qubit matrix.

    The input qubit is |+>. The probe branches |alpha_0>, |alpha_1> are expressed in
    the orthonormal basis {|x>, |y>} after a local phase on |1> makes their overlap
    real. Basis order is |0x>, |0y>, |1x>, |1y>.
    """
    if alpha <= 0:
        raise ValidationError(f"alpha must be real and > 0, got {alpha}")

    zeta = coherence_parameter(alpha, CouplingSpec(chi, gamma, t))
    delta = np.exp(_log_delta(alpha, chi, gamma, t))
    # b = sqrt((1 - delta)/2) with 1 - delta from expm1 so small separations survive
    a = np.sqrt(0.5 * (1.0 + delta))
    b = np.sqrt(-0.5 * np.expm1(_log_delta(alpha, chi, gamma, t)))
    zc = np.conj(zeta)

    rho = 0.5 * np.array(
        [
            [a * a, a * b, zeta * a * a, -zeta * a * b],
            [a * b, b * b, zeta * a * b, -zeta * b * b],
            [zc * a * a, zc * a * b, a * a, -a * b],
            [-zc * a * b, -zc * b * b, -a * b, b * b],
        ],
        dtype=complex,
    )
    return rho


def concurrence(rho):
    """Wootters concurrence of a two-qubit density matrix."""
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise ValidationError(f"concurrence needs a 4x4 matrix, got {rho.shape}")
    rho_tilde = YY @ rho.conj() @ YY
    eigs = np.linalg.eigvals(rho @ rho_tilde)
    eigs = np.where(eigs.real > EIG_CLAMP, eigs.real, 0.0)
    lambdas = np.sort(np.sqrt(eigs))[::-1]
    c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]
    return float(np.clip(c, 0.0, 1.0))


def von_neumann_entropy(rho):
    """Base-2 entropy, with 0 log 0 = 0."""
    rho = np.asarray(rho, dtype=complex)
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    eigs = eigs[eigs > EIG_CLAMP]
    return float(max(0.0, -np.sum(eigs * np.log2(eigs))))


def fidelity_pure(rho, target):
    """<phi|rho|phi> for a normalized target vector."""
    target = np.asarray(target, dtype=complex)
    norm = np.vdot(target, target).real
    if abs(norm - 1.0) > STRUCT_TOL:
        raise ValidationError(f"target state is not normalized (norm^2 = {norm:.12g})")
    rho = np.asarray(rho, dtype=complex)
    return float(np.clip(np.vdot(target, rho @ target).real, 0.0, 1.0))


def entanglement_at(alpha, gamma_over_chi, chit):
    """(concurrence, entropy) of the orthogonalized state at scaled time chi t (chi = 1)."""
    rho = orthogonalize(alpha, 1.0, gamma_over_chi, chit)
    return concurrence(rho), von_neumann_entropy(rho)


def default_peak_grid(alpha, points=4000, chit_max=np.pi):
    # The peak sits near chi t ~ 1/alpha, so the grid is logarithmic from well below it
    lowest = min(1e-3 / max(alpha, 1.0), chit_max / points)
    return np.geomspace(lowest, chit_max, points)


def peak_scan(alpha, gamma_over_chi, grid=None, rel_tol=1e-6):
    """Time of maximum concurrence: coarse grid maximum refined by golden section."""
    grid = default_peak_grid(alpha) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValidationError("peak scan grid is empty")
    grid = np.sort(grid)

    values = np.array([entanglement_at(alpha, gamma_over_chi, t)[0] for t in grid])
    i = int(np.argmax(values))
    t_star = grid[i]

    if 0 < i < grid.size - 1 and values[i] > 0.0:
        try:
            res = minimize_scalar(
                lambda t: -entanglement_at(alpha, gamma_over_chi, t)[0],
                bracket=(grid[i - 1], grid[i], grid[i + 1]),
                method="golden",
                tol=rel_tol,
            )
            if -res.fun >= values[i]:
                t_star = float(res.x)
        except ValueError:
            # Flat top: neighbours tie with the maximum, keep the grid point
            pass

    c_max, entropy = entanglement_at(alpha, gamma_over_chi, t_star)
    return PeakReport(float(alpha), float(gamma_over_chi), float(t_star), c_max, entropy)
