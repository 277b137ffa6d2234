from dataclasses import dataclass
from typing import Tuple

import numpy as np

from qubus.utils.errors import ValidationError


# Structural invariants vs. closed-form identities
STRUCT_TOL = 1e-9
IDENTITY_TOL = 1e-12
# Kernels extracted from the engine carry a little roundoff below zero
PSD_FLOOR = -1e-10
MAX_QUBITS = 8


@dataclass(frozen=True)
class BasisIndex:
    """Computational basis label of an n-qubit register, qubit 0 most significant."""

    bits: Tuple[int, ...]

    @classmethod
    def from_int(cls, index, n_qubits):
        return cls(tuple((index >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits)))

    @property
    def index(self):
        value = 0
        for bit in self.bits:
            value = (value << 1) | bit
        return value

    @property
    def z(self):
        return tuple(1 - 2 * bit for bit in self.bits)


@dataclass(frozen=True)
class Branch:
    ket: BasisIndex
    bra: BasisIndex
    coeff: complex
    ket_amp: complex
    bra_amp: complex


def z_values(n_qubits):
    # Row v holds z_k = (-1)^{bit_k} for every qubit k
    d = 2 ** n_qubits
    bits = (np.arange(d)[:, None] >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    return 1 - 2 * bits


def z_of(n_qubits, target):
    """Z eigenvalue of `target` for every basis index."""
    return z_values(n_qubits)[:, target]


def log_overlap(bra_amp, ket_amp):
    # log <bra|ket> = -|ket|^2/2 - |bra|^2/2 + conj(bra) ket, real part kept as -|ket - bra|^2/2
    bra_amp = np.asarray(bra_amp, dtype=complex)
    ket_amp = np.asarray(ket_amp, dtype=complex)
    return -0.5 * np.abs(ket_amp - bra_amp) ** 2 + 1j * cross_imag(bra_amp, ket_amp)


def cross_imag(bra_amp, ket_amp):
    """Im(conj(bra) ket), exactly zero when bra == ket."""
    bra_amp = np.asarray(bra_amp, dtype=complex)
    ket_amp = np.asarray(ket_amp, dtype=complex)
    return bra_amp.real * ket_amp.imag - bra_amp.imag * ket_amp.real


def overlap(bra_amp, ket_amp):
    return np.exp(log_overlap(bra_amp, ket_amp))


def check_register(n_qubits):
    if not isinstance(n_qubits, (int, np.integer)) or n_qubits < 1:
        raise ValidationError(f"register size must be a positive integer, got {n_qubits}")
    if n_qubits > MAX_QUBITS:
        raise ValidationError(f"register size {n_qubits} exceeds {MAX_QUBITS} qubits")


def check_density(rho, tol=STRUCT_TOL):
    """Raise if `rho` is not a Hermitian, unit-trace, PSD matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    trace = np.trace(rho)
    if abs(trace - 1.0) > tol:
        raise ValidationError(f"density matrix trace is {trace.real:.12g}, not 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lowest < -tol:
        raise ValidationError(f"density matrix is not positive semidefinite ({lowest:.3g})")
    return rho


def density_from_mapping(entries, n_qubits):
    d = 2 ** n_qubits
    rho = np.zeros((d, d), dtype=complex)
    for (ket, bra), value in entries.items():
        ket = ket.index if isinstance(ket, BasisIndex) else int(ket)
        bra = bra.index if isinstance(bra, BasisIndex) else int(bra)
        rho[ket, bra] = value
    return rho


@dataclass(frozen=True, eq=False)
class HybridState:
    """
    Sum over c_{vv'} |v><v'| (x) |ket_amp><bra_amp| of a register and one coherent probe.

    Branches are stored as three d x d arrays indexed by (ket, bra) basis index,
    so every operation updates all branches at once and keeps the pair structure.
    """

    n_qubits: int
    coeff: np.ndarray
    ket_amp: np.ndarray
    bra_amp: np.ndarray

    def __post_init__(self):
        for name in ("coeff", "ket_amp", "bra_amp"):
            array = np.array(getattr(self, name), dtype=complex)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def dim(self):
        return 2 ** self.n_qubits

    def branch(self, ket, bra):
        ket = ket if isinstance(ket, BasisIndex) else BasisIndex.from_int(ket, self.n_qubits)
        bra = bra if isinstance(bra, BasisIndex) else BasisIndex.from_int(bra, self.n_qubits)
        i, j = ket.index, bra.index
        return Branch(ket, bra, self.coeff[i, j], self.ket_amp[i, j], self.bra_amp[i, j])

    def replace(self, coeff=None, ket_amp=None, bra_amp=None):
        return HybridState(
            self.n_qubits,
            self.coeff if coeff is None else coeff,
            self.ket_amp if ket_amp is None else ket_amp,
            self.bra_amp if bra_amp is None else bra_amp,
        )

    def check(self, tol=STRUCT_TOL):
        """Raise ValidationError when Hermiticity or the trace condition is broken."""
        c, k, b = self.coeff, self.ket_amp, self.bra_amp
        if not np.all(np.isfinite(c)):
            raise ValidationError("branch coefficients must be finite")
        if np.max(np.abs(c - c.conj().T)) > tol:
            raise ValidationError("Hermiticity: coeff(v', v) != conj(coeff(v, v'))")
        if np.max(np.abs(k - b.T)) > tol:
            raise ValidationError("Hermiticity: ket/bra amplitudes are not swap-consistent")
        trace = np.trace(c)
        if abs(trace - 1.0) > tol:
            raise ValidationError(f"trace of diagonal branches is {trace.real:.12g}, not 1")
        if np.max(np.abs(np.diag(k) - np.diag(b))) > tol:
            raise ValidationError("diagonal branches must have ket_amp == bra_amp")
        return self

    def probe_disentangled(self, tol=IDENTITY_TOL):
        amps = np.concatenate([self.ket_amp.ravel(), self.bra_amp.ravel()])
        return np.max(np.abs(amps - amps[0])) <= tol


@dataclass(frozen=True, eq=False)
class DephasingKernel:
    """Elementwise multiplier g(v, v') a diagonal sequence applies to the qubit density."""

    n_qubits: int
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=complex)
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def check(self, tol=IDENTITY_TOL):
        g = self.g
        if g.shape != (2 ** self.n_qubits,) * 2:
            raise ValidationError(f"kernel shape {g.shape} does not match {self.n_qubits} qubits")
        if np.max(np.abs(np.diag(g) - 1.0)) > tol:
            raise ValidationError("kernel diagonal must be 1 (trace preservation)")
        if np.max(np.abs(g - g.conj().T)) > tol:
            raise ValidationError("kernel must be Hermitian")
        if np.max(np.abs(g)) > 1.0 + tol:
            raise ValidationError("kernel entries must satisfy |g| <= 1")
        if self.min_eigenvalue() < PSD_FLOOR:
            raise ValidationError("kernel is not positive semidefinite (not completely positive)")
        return self

    def min_eigenvalue(self):
        return np.linalg.eigvalsh(0.5 * (self.g + self.g.conj().T)).min()

    def is_completely_positive(self):
        try:
            self.check()
        except ValidationError:
            return False
        return True


def new_product_state(qubit_density, probe_amp=0.0, n_qubits=None):
    """Product of a qubit density matrix with the coherent probe |probe_amp>."""
    if isinstance(qubit_density, dict):
        if n_qubits is None:
            ket = next(iter(qubit_density))[0]
            if isinstance(ket, BasisIndex):
                n_qubits = len(ket.bits)
        if n_qubits is None:
            largest = max(max(int(k), int(b)) for k, b in qubit_density)
            n_qubits = max(1, int(np.ceil(np.log2(largest + 1))))
        rho = density_from_mapping(qubit_density, n_qubits)
    else:
        rho = np.asarray(qubit_density, dtype=complex)
        n_qubits = int(round(np.log2(rho.shape[0])))
        if 2 ** n_qubits != rho.shape[0]:
            raise ValidationError(f"density dimension {rho.shape[0]} is not a power of 2")
    check_register(n_qubits)
    check_density(rho)

    amps = np.full(rho.shape, complex(probe_amp))
    return HybridState(n_qubits, rho, amps, amps)


def reduce_qubits(state):
    """Trace out the probe: entry (v, v') = coeff(v, v') <bra_amp|ket_amp>."""
    rho = state.coeff * overlap(state.bra_amp, state.ket_amp)
    assert np.max(np.abs(rho - rho.conj().T)) <= STRUCT_TOL, "reduced density not Hermitian"
    return rho


def observed_kernel(state, qubit_density, tol=STRUCT_TOL):
    """
    Multiplier g with reduce_qubits(state) = qubit_density * g.

    Defined on the nonzero entries of `qubit_density`, NaN elsewhere. It is the channel
    of the sequence only once the probe has disentangled.
    """
    rho0 = np.asarray(qubit_density, dtype=complex)
    defined = np.abs(rho0) > tol
    g = np.full(rho0.shape, np.nan, dtype=complex)
    g[defined] = reduce_qubits(state)[defined] / rho0[defined]
    return g


def apply_kernel(density, kernel):
    density = np.asarray(density, dtype=complex)
    if density.shape != kernel.g.shape:
        raise ValidationError(
            f"density shape {density.shape} does not match kernel shape {kernel.g.shape}"
        )
    return density * kernel.g


def pure_density(vector):
    vector = np.asarray(vector, dtype=complex)
    return np.outer(vector, vector.conj())


def plus_state(n_qubits):
    d = 2 ** n_qubits
    return np.full((d, d), 1.0 / d, dtype=complex)
