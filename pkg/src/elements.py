"""
Optical elements as unitaries on a truncated Fock basis

Every passive element here (beam splitter, phase shifter, frequency converter)
is a linear transformation of creation operators. `lift_mode_transform`
carries such a transformation into Fock space exactly, by substituting the
creation operators of each basis state and expanding. The converter is also
available through `matrix_exponential_oracle`, which exponentiates the pair
Hamiltonian directly and serves as an independent check.
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from src.errors import ConfigurationError, DomainError
from src.fock import ElementUnitary, FockBasis, ModeSpec, hopping_operator

HERMITICITY_TOLERANCE = 1e-12

ModePair = Tuple[ModeSpec, ModeSpec]


@dataclass(frozen=True)
class ConverterSpec:
    """
    Pairwise frequency conversion k_j <-> kbar_j driven by an undepleted pump

    Args:
        pairs: (IR mode, UV mode) for every coupled pair
        theta: mixing angle, QE = sin^2(theta)
        pump_phase: pump phase applied to every pair
        pair_thetas: optional per-pair mixing angles overriding theta
        pair_pump_phases: optional per-pair pump phases overriding pump_phase
    """
    pairs: Tuple[ModePair, ...]
    theta: float
    pump_phase: float = 0.0
    pair_thetas: Optional[Tuple[float, ...]] = None
    pair_pump_phases: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        pairs = tuple((ir, uv) for ir, uv in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        labels = [mode.label for pair in pairs for mode in pair]
        duplicated = sorted({label for label in labels if labels.count(label) > 1})
        if duplicated:
            raise ConfigurationError(f"Converter pairs overlap on modes: {', '.join(duplicated)}")
        for name in ("pair_thetas", "pair_pump_phases"):
            values = getattr(self, name)
            if values is None:
                continue
            values = tuple(float(v) for v in values)
            if len(values) != len(pairs):
                raise ConfigurationError(f"{name} has {len(values)} entries for {len(pairs)} pairs")
            object.__setattr__(self, name, values)
        for value in (self.theta, self.pump_phase, *self.thetas(), *self.pump_phases()):
            if not math.isfinite(value):
                raise ConfigurationError(f"Converter angles must be finite, got {value}")

    def thetas(self) -> Tuple[float, ...]:
        if self.pair_thetas is not None:
            return self.pair_thetas
        return (float(self.theta),) * len(self.pairs)

    def pump_phases(self) -> Tuple[float, ...]:
        if self.pair_pump_phases is not None:
            return self.pair_pump_phases
        return (float(self.pump_phase),) * len(self.pairs)

    @property
    def quantum_efficiency(self) -> float:
        return math.sin(self.theta) ** 2


@dataclass(frozen=True, eq=False)
class PairHamiltonian:
    basis: FockBasis
    matrix: np.ndarray

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def identity(basis: FockBasis) -> ElementUnitary:
    return ElementUnitary(basis, np.eye(basis.dimension), name="identity")


def lift_mode_transform(basis: FockBasis, modes: Sequence[ModeSpec], transform: np.ndarray,
                        name: str = "") -> ElementUnitary:
    """
    Lift a passive mode transformation to the Fock basis

    Column i of `transform` is the image of the creation operator of modes[i]:
    a_i^dag -> sum_j transform[j, i] a_j^dag. Photon number is conserved, so the
    cutoff subspace is mapped onto itself without truncation error.
    """
    transform = np.asarray(transform, dtype=np.complex128)
    indices = [basis.mode_index(mode) for mode in modes]
    if transform.shape != (len(indices), len(indices)):
        raise DomainError(f"Mode transform of shape {transform.shape} for {len(indices)} modes")

    matrix = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    for col, occupation in enumerate(basis.states):
        spectator = list(occupation)
        for idx in indices:
            spectator[idx] = 0
        terms: Dict[Tuple[int, ...], complex] = {tuple(spectator): 1.0 + 0j}
        for local, idx in enumerate(indices):
            for _ in range(occupation[idx]):
                expanded: Dict[Tuple[int, ...], complex] = defaultdict(complex)
                for monomial, coefficient in terms.items():
                    for target, target_idx in enumerate(indices):
                        weight = transform[target, local]
                        if weight == 0:
                            continue
                        grown = list(monomial)
                        grown[target_idx] += 1
                        expanded[tuple(grown)] += coefficient * weight
                terms = expanded
        norm_in = math.prod(math.factorial(n) for n in occupation)
        for monomial, coefficient in terms.items():
            norm_out = math.prod(math.factorial(n) for n in monomial)
            matrix[basis.state_index(monomial), col] += coefficient * math.sqrt(norm_out / norm_in)
    return ElementUnitary(basis, matrix, name=name)


def beam_splitter(basis: FockBasis, mode_a: ModeSpec, mode_b: ModeSpec,
                  transmissivity: float) -> ElementUnitary:
    """
    Symmetric beam splitter a -> sqrt(T) a + i sqrt(1-T) b, b -> i sqrt(1-T) a + sqrt(T) b

    Raises:
        DomainError: modes outside the basis, mismatched wavelength or
            polarization, or transmissivity outside [0, 1]
    """
    basis.mode_index(mode_a)
    basis.mode_index(mode_b)
    if mode_a.label == mode_b.label:
        raise DomainError("A beam splitter needs two distinct modes")
    if not 0.0 <= transmissivity <= 1.0:
        raise DomainError(f"Transmissivity must lie in [0, 1], got {transmissivity}")
    if not math.isclose(mode_a.wavelength, mode_b.wavelength, rel_tol=1e-12):
        raise DomainError(
            f"Beam splitter cannot mix {mode_a.wavelength} nm with {mode_b.wavelength} nm; "
            "use a frequency converter")
    if mode_a.polarization != mode_b.polarization:
        raise DomainError(
            f"Beam splitter cannot mix polarizations {mode_a.polarization.value} and {mode_b.polarization.value}")
    t = math.sqrt(transmissivity)
    r = 1j * math.sqrt(1.0 - transmissivity)
    transform = np.array([[t, r], [r, t]], dtype=np.complex128)
    return lift_mode_transform(basis, [mode_a, mode_b], transform,
                               name=f"BS({mode_a.label},{mode_b.label},T={transmissivity:g})")


def phase_shifter(basis: FockBasis, mode: ModeSpec, phi: float) -> ElementUnitary:
    """Multiply every basis state by exp(i n phi), n the photon number in `mode`"""
    occupation = basis.occupations[:, basis.mode_index(mode)]
    return ElementUnitary(basis, np.diag(np.exp(1j * phi * occupation)),
                          name=f"phase({mode.label},{phi:.6g})")


def _pair_transform(theta: float, pump_phase: float) -> np.ndarray:
    c = math.cos(theta)
    s = math.sin(theta)
    return np.array([
        [c, -1j * np.exp(-1j * pump_phase) * s],
        [-1j * np.exp(1j * pump_phase) * s, c],
    ], dtype=np.complex128)


def frequency_converter(basis: FockBasis, spec: ConverterSpec) -> ElementUnitary:
    """
    Pairwise conversion unitary

    Single-photon action on each pair (k_j, kbar_j):
        |1,0> -> cos(theta)|1,0> - i e^{i Theta} sin(theta)|0,1>
        |0,1> -> -i e^{-i Theta} sin(theta)|1,0> + cos(theta)|0,1>
    Higher occupations follow from the exact lift; the vacuum is a fixed point.
    """
    modes = [mode for pair in spec.pairs for mode in pair]
    for mode in modes:
        basis.mode_index(mode)
    transform = np.zeros((len(modes), len(modes)), dtype=np.complex128)
    for j, (theta, pump_phase) in enumerate(zip(spec.thetas(), spec.pump_phases())):
        transform[2 * j:2 * j + 2, 2 * j:2 * j + 2] = _pair_transform(theta, pump_phase)
    return lift_mode_transform(basis, modes, transform, name=f"U(theta={spec.theta:.6g})")


def pair_hamiltonian(basis: FockBasis, spec: ConverterSpec) -> PairHamiltonian:
    """
    sum_j w_j (e^{i Theta_j} abar_j^dag a_j + h.c.) with exp(-i theta H) equal to the converter

    w_j = theta_j / theta when per-pair angles are set, otherwise 1.

    Raises:
        DomainError: per-pair angles are set, theta is zero and some pair angle is not
    """
    if spec.pair_thetas is not None and spec.theta == 0 and any(t != 0 for t in spec.thetas()):
        raise DomainError("Per-pair angles need a non-zero common theta to be written as exp(-i theta H)")
    matrix = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    for (ir, uv), theta_j, phase_j in zip(spec.pairs, spec.thetas(), spec.pump_phases()):
        weight = theta_j / spec.theta if spec.pair_thetas is not None and spec.theta != 0 else 1.0
        up = hopping_operator(basis, ir, uv)
        matrix += weight * (np.exp(1j * phase_j) * up + np.exp(-1j * phase_j) * up.conj().T)
    return PairHamiltonian(basis, matrix)


def matrix_exponential_oracle(h: PairHamiltonian, theta: float) -> ElementUnitary:
    """
    exp(-i theta H) by dense Hermitian eigendecomposition

    Raises:
        DomainError: H is not Hermitian
    """
    error = h.hermiticity_error()
    if error > HERMITICITY_TOLERANCE:
        raise DomainError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {error:.3e})")
    eig_val, eig_vec = la.eigh(h.matrix)
    propagator = (eig_vec * np.exp(-1j * theta * eig_val)) @ eig_vec.conj().T
    return ElementUnitary(h.basis, propagator, name=f"oracle(theta={theta:.6g})")


def adjoint(u: ElementUnitary) -> ElementUnitary:
    return ElementUnitary(u.basis, u.matrix.conj().T, name=f"{u.name}^dag")


def compose(elements: Sequence[ElementUnitary]) -> ElementUnitary:
    """
    Network unitary for elements listed in application order

    compose([U1, U2, U3]) = U3 U2 U1.
    """
    if not elements:
        raise DomainError("Cannot compose an empty element list")
    basis = elements[0].basis
    matrix = np.eye(basis.dimension, dtype=np.complex128)
    for element in elements:
        if element.basis is not basis and element.basis != basis:
            raise DomainError(f"Element '{element.name}' lives on a different basis")
        matrix = element.matrix @ matrix
    return ElementUnitary(basis, matrix, name=" -> ".join(e.name for e in elements))
