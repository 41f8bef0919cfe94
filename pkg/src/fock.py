"""
Truncated multimode Fock space

Bases enumerate every occupation tuple whose total photon number does not
exceed the cutoff. State vectors and element unitaries are dense numpy arrays
on such a basis and are immutable once built.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import comb

from src.errors import ConfigurationError, DegenerateInputError, DomainError

NORM_TOLERANCE = 1e-12
UNITARITY_TOLERANCE = 1e-12
# marginal probabilities below this are numerical residue of exact zeros
PROBABILITY_FLOOR = 1e-15

Occupation = Tuple[int, ...]


class Polarization(str, Enum):
    H = "H"
    V = "V"
    NONE = "none"


@dataclass(frozen=True)
class ModeSpec:
    """One optical mode: wavelength in nm, polarization tag and path tag"""
    label: str
    wavelength: float
    polarization: Polarization = Polarization.NONE
    path: str = ""

    def __post_init__(self):
        if not self.label:
            raise ConfigurationError("Mode label cannot be empty")
        if not math.isfinite(self.wavelength) or self.wavelength <= 0:
            raise DomainError(f"Mode '{self.label}' needs a positive wavelength, got {self.wavelength}")
        object.__setattr__(self, "polarization", Polarization(self.polarization))


ModeRef = Union[ModeSpec, str]


class ModeRegistry:
    """Ordered collection of modes with unique labels"""

    def __init__(self, modes: Iterable[ModeSpec] = ()):
        self._modes: Dict[str, ModeSpec] = {}
        for mode in modes:
            self.add(mode)

    def add(self, mode: ModeSpec) -> ModeSpec:
        if mode.label in self._modes:
            raise ConfigurationError(f"Duplicate mode label '{mode.label}'")
        self._modes[mode.label] = mode
        return mode

    def get(self, label: str) -> ModeSpec:
        try:
            return self._modes[label]
        except KeyError:
            raise DomainError(f"Unknown mode '{label}'") from None

    def __getitem__(self, label: str) -> ModeSpec:
        return self.get(label)

    def __contains__(self, label: str) -> bool:
        return label in self._modes

    def __iter__(self) -> Iterator[ModeSpec]:
        return iter(self._modes.values())

    def __len__(self) -> int:
        return len(self._modes)

    def modes(self) -> List[ModeSpec]:
        return list(self._modes.values())


def _compositions(total: int, n_modes: int) -> Iterator[Occupation]:
    # descending lexicographic order within one photon-number sector
    if n_modes == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, n_modes - 1):
            yield (first,) + rest


def basis_dimension(n_modes: int, max_total_photons: int) -> int:
    """Number of occupation tuples of n_modes modes with at most max_total_photons photons"""
    return int(comb(n_modes + max_total_photons, max_total_photons, exact=True))


@dataclass(frozen=True)
class FockBasis:
    modes: Tuple[ModeSpec, ...]
    max_total_photons: int
    states: Tuple[Occupation, ...] = field(compare=False, repr=False)
    _index: Dict[Occupation, int] = field(compare=False, repr=False)
    _mode_index: Dict[str, int] = field(compare=False, repr=False)
    occupations: np.ndarray = field(compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode_index(self, mode: ModeRef) -> int:
        label = mode.label if isinstance(mode, ModeSpec) else mode
        idx = self._mode_index.get(label)
        if idx is None or (isinstance(mode, ModeSpec) and self.modes[idx] != mode):
            raise DomainError(f"Mode '{label}' is not part of this basis")
        return idx

    def mode(self, label: str) -> ModeSpec:
        return self.modes[self.mode_index(label)]

    def state_index(self, occupation: Sequence[int]) -> int:
        occupation = tuple(int(n) for n in occupation)
        if len(occupation) != self.n_modes:
            raise DomainError(f"Occupation {occupation} does not match {self.n_modes} modes")
        if any(n < 0 for n in occupation):
            raise DomainError(f"Occupation {occupation} has negative entries")
        if sum(occupation) > self.max_total_photons:
            raise DomainError(
                f"Occupation {occupation} exceeds the cutoff of {self.max_total_photons} photons")
        return self._index[occupation]


def build_basis(modes: Sequence[ModeSpec], max_total_photons: int) -> FockBasis:
    """
    Enumerate all occupation tuples with total photon number <= max_total_photons

    States are grouped by total photon number (vacuum first) and ordered
    descending-lexicographically within each group, e.g. 00, 10, 01, 20, 11, 02.

    Raises:
        ConfigurationError: empty mode list or duplicate labels
        DomainError: negative cutoff
    """
    modes = tuple(modes)
    if not modes:
        raise ConfigurationError("A basis needs at least one mode")
    registry = ModeRegistry(modes)
    if int(max_total_photons) != max_total_photons or max_total_photons < 0:
        raise DomainError(f"Cutoff must be a non-negative integer, got {max_total_photons}")
    max_total_photons = int(max_total_photons)

    states = tuple(
        occupation
        for total in range(max_total_photons + 1)
        for occupation in _compositions(total, len(modes))
    )
    occupations = np.array(states, dtype=np.int64).reshape(len(states), len(modes))
    occupations.setflags(write=False)
    return FockBasis(
        modes=modes,
        max_total_photons=max_total_photons,
        states=states,
        _index={occupation: i for i, occupation in enumerate(states)},
        _mode_index={mode.label: i for i, mode in enumerate(registry)},
        occupations=occupations,
    )


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen(self.amplitudes)
        if amplitudes.shape != (self.basis.dimension,):
            raise DomainError(
                f"State has {amplitudes.shape} amplitudes for a basis of dimension {self.basis.dimension}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise DomainError(f"State vector is not normalized (norm {norm!r})")
        object.__setattr__(self, "amplitudes", amplitudes)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.basis.state_index(occupation)])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class ElementUnitary:
    basis: FockBasis
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        dim = self.basis.dimension
        if matrix.shape != (dim, dim):
            raise DomainError(f"Unitary of shape {matrix.shape} does not fit a basis of dimension {dim}")
        object.__setattr__(self, "matrix", matrix)
        error = self.unitarity_error()
        if error > UNITARITY_TOLERANCE:
            raise DomainError(f"Element '{self.name}' is not unitary (max |M^dag M - I| = {error:.3e})")

    def unitarity_error(self) -> float:
        product = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(product - np.eye(self.basis.dimension))))


def _require_same_basis(a: FockBasis, b: FockBasis) -> None:
    if a is not b and a != b:
        raise DomainError("Operands live on different Fock bases")


def pure_state(basis: FockBasis, occupation: Sequence[int]) -> StateVector:
    """Basis state with amplitude 1 on the given occupation tuple"""
    amplitudes = np.zeros(basis.dimension, dtype=np.complex128)
    amplitudes[basis.state_index(occupation)] = 1.0
    return StateVector(basis, amplitudes)


def fock_state(basis: FockBasis, photons: Dict[ModeRef, int]) -> StateVector:
    """Basis state from a sparse {mode: photon number} map, all other modes empty"""
    occupation = [0] * basis.n_modes
    for mode, n in photons.items():
        occupation[basis.mode_index(mode)] = int(n)
    return pure_state(basis, occupation)


def vacuum(basis: FockBasis) -> StateVector:
    return pure_state(basis, (0,) * basis.n_modes)


def superpose(terms: Sequence[Tuple[complex, StateVector]]) -> StateVector:
    """
    Normalized linear combination of states sharing one basis

    Raises:
        DomainError: terms on different bases
        DegenerateInputError: no terms or the combination cancels to zero
    """
    if not terms:
        raise DegenerateInputError("Cannot superpose an empty list of states")
    basis = terms[0][1].basis
    total = np.zeros(basis.dimension, dtype=np.complex128)
    for coefficient, state in terms:
        _require_same_basis(basis, state.basis)
        total = total + complex(coefficient) * state.amplitudes
    norm = np.linalg.norm(total)
    if norm < 1e-14:
        raise DegenerateInputError("Superposition has zero norm")
    return StateVector(basis, total / norm)


def coherent_state(basis: FockBasis, mode: ModeRef, gamma: complex) -> StateVector:
    """Coherent state on one mode, truncated at the basis cutoff and renormalized"""
    idx = basis.mode_index(mode)
    gamma = complex(gamma)
    amplitudes = np.zeros(basis.dimension, dtype=np.complex128)
    for n in range(basis.max_total_photons + 1):
        occupation = [0] * basis.n_modes
        occupation[idx] = n
        amplitudes[basis.state_index(occupation)] = (
            np.exp(-abs(gamma) ** 2 / 2) * gamma ** n / math.sqrt(math.factorial(n)))
    return StateVector(basis, amplitudes / np.linalg.norm(amplitudes))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in a"""
    _require_same_basis(a.basis, b.basis)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner_product(a, b)) ** 2


def apply(u: ElementUnitary, s: StateVector) -> StateVector:
    _require_same_basis(u.basis, s.basis)
    return StateVector(s.basis, u.matrix @ s.amplitudes)


def mode_occupation_distribution(s: StateVector, mode: ModeRef) -> Dict[int, float]:
    """Marginal photon-number distribution of one mode"""
    idx = s.basis.mode_index(mode)
    weights = np.bincount(s.basis.occupations[:, idx], weights=s.probabilities(),
                          minlength=s.basis.max_total_photons + 1)
    return {n: float(p) for n, p in enumerate(weights) if p > PROBABILITY_FLOOR}


def mean_photon_number(s: StateVector, mode: ModeRef) -> float:
    idx = s.basis.mode_index(mode)
    return float(np.dot(s.basis.occupations[:, idx], s.probabilities()))


def project(s: StateVector, keep: Callable[[Occupation], bool]) -> Tuple[float, Optional[StateVector]]:
    """
    Project onto the basis states accepted by `keep`

    Returns:
        Probability of the projection and the renormalized projected state,
        or (0.0, None) when nothing survives
    """
    mask = np.array([bool(keep(occupation)) for occupation in s.basis.states])
    kept = np.where(mask, s.amplitudes, 0.0)
    probability = float(np.sum(np.abs(kept) ** 2))
    if probability <= PROBABILITY_FLOOR:
        return 0.0, None
    return probability, StateVector(s.basis, kept / math.sqrt(probability))


def number_operator(basis: FockBasis, mode: ModeRef) -> np.ndarray:
    return np.diag(basis.occupations[:, basis.mode_index(mode)].astype(np.complex128))


def hopping_operator(basis: FockBasis, source: ModeRef, target: ModeRef) -> np.ndarray:
    """Matrix of a_target^dag a_source; photon number is conserved so the cutoff subspace is closed"""
    src = basis.mode_index(source)
    dst = basis.mode_index(target)
    if src == dst:
        return number_operator(basis, source)
    matrix = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    for col, occupation in enumerate(basis.states):
        n_src = occupation[src]
        if n_src == 0:
            continue
        moved = list(occupation)
        moved[src] -= 1
        moved[dst] += 1
        row = basis.state_index(moved)
        matrix[row, col] = math.sqrt(n_src) * math.sqrt(moved[dst])
    return matrix
