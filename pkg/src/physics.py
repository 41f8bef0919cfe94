"""
Scalar nonlinear-optics relations

Wavelengths are in nm, pump intensities in GW/cm^2, crystal lengths in mm and
wavevector magnitudes in 1/um.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.constants import epsilon_0

from src.errors import ConfigurationError, DegenerateInputError, DomainError

# LiIO3 placeholder indices from external literature; only absolute mode reads them
LIIO3_N_O = 1.86
LIIO3_N_E_BAR = 1.75

CALIBRATED = "calibrated"
ABSOLUTE = "absolute"

REFERENCE_ANCHOR_QE = 1.0
REFERENCE_ANCHOR_INTENSITY = 200.0  # GW/cm^2


@dataclass(frozen=True)
class CrystalParams:
    """
    Nonlinear crystal slab

    In calibrated mode `d2` is the fitted coupling in rad / (mm sqrt(GW/cm^2)),
    so the sin^2 argument is d2 * length_l * sqrt(I_p). In absolute mode `d2`
    is the second-order coefficient in pm/V and every constant enters in SI.
    """
    length_l: float = 1.0
    d2: Optional[float] = None
    n_o: float = LIIO3_N_O
    n_e_bar: float = LIIO3_N_E_BAR
    theta_m: float = 0.0
    epsilon0_convention: str = CALIBRATED

    def __post_init__(self):
        if not self.length_l > 0:
            raise DomainError(f"Crystal length must be positive, got {self.length_l}")
        if self.n_o < 1 or self.n_e_bar < 1:
            raise DomainError(f"Refractive indices must be >= 1, got n_o={self.n_o}, n_e_bar={self.n_e_bar}")
        if self.epsilon0_convention not in (CALIBRATED, ABSOLUTE):
            raise ConfigurationError(
                f"Unknown crystal mode '{self.epsilon0_convention}' (use '{CALIBRATED}' or '{ABSOLUTE}')")


@dataclass(frozen=True)
class PumpSpec:
    wavelength_p: float = 795.0
    intensity: float = 0.0
    phase_theta: float = 0.0

    def __post_init__(self):
        if not self.wavelength_p > 0:
            raise DomainError(f"Pump wavelength must be positive, got {self.wavelength_p}")
        if not self.intensity >= 0:
            raise DomainError(f"Pump intensity must be non-negative, got {self.intensity}")


@dataclass(frozen=True)
class PhaseMatchResult:
    direction: Tuple[float, float]
    mismatch: float  # required minus geometric magnitude, 1/um
    wavevector: Tuple[float, float]


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive, got {value}")


def sum_frequency_wavelength(lambda_in: float, lambda_p: float) -> float:
    """Up-converted wavelength (1/lambda + 1/lambda_p)^-1"""
    _require_positive(lambda_in=lambda_in, lambda_p=lambda_p)
    return 1.0 / (1.0 / lambda_in + 1.0 / lambda_p)


def difference_frequency_wavelength(lambda_bar: float, lambda_p: float) -> float:
    """
    Down-converted wavelength (1/lambda_bar - 1/lambda_p)^-1

    Raises:
        DomainError: lambda_bar >= lambda_p, which has no positive solution
    """
    _require_positive(lambda_bar=lambda_bar, lambda_p=lambda_p)
    if lambda_bar >= lambda_p:
        raise DomainError(
            f"Down-conversion needs lambda_bar < lambda_p, got {lambda_bar} nm >= {lambda_p} nm")
    return 1.0 / (1.0 / lambda_bar - 1.0 / lambda_p)


def conversion_argument(pump: PumpSpec, crystal: CrystalParams, lambda_in: float) -> float:
    """Mixing angle theta with QE = sin^2(theta)"""
    _require_positive(lambda_in=lambda_in)
    if crystal.d2 is None:
        raise ConfigurationError(
            f"Crystal has no nonlinearity set for {crystal.epsilon0_convention} mode; calibrate it first")
    if crystal.epsilon0_convention == CALIBRATED:
        return crystal.d2 * crystal.length_l * math.sqrt(pump.intensity)
    intensity_si = pump.intensity * 1e13  # GW/cm^2 -> W/m^2
    denominator = lambda_in * 1e-9 * pump.wavelength_p * 1e-9 * crystal.n_o * crystal.n_e_bar
    return (math.pi / epsilon_0) * math.sqrt(intensity_si / denominator) * crystal.d2 * 1e-12 * crystal.length_l * 1e-3


def quantum_efficiency(pump: PumpSpec, crystal: CrystalParams, lambda_in: float) -> float:
    """Single-photon conversion probability sin^2(theta) for a plane-wave collinear interaction"""
    return math.sin(conversion_argument(pump, crystal, lambda_in)) ** 2


def calibrate_effective_nonlinearity(qe_ref: float, intensity_ref: float,
                                     crystal: Optional[CrystalParams] = None) -> CrystalParams:
    """
    Fold all material constants into one coupling so that QE(intensity_ref) = qe_ref
    on the first sin^2 branch

    Raises:
        DomainError: qe_ref outside (0, 1] or intensity_ref <= 0
    """
    if not 0.0 < qe_ref <= 1.0:
        raise DomainError(f"Reference QE must lie in (0, 1], got {qe_ref}")
    _require_positive(intensity_ref=intensity_ref)
    crystal = crystal or CrystalParams()
    coupling = math.asin(math.sqrt(qe_ref)) / (crystal.length_l * math.sqrt(intensity_ref))
    return replace(crystal, d2=coupling, epsilon0_convention=CALIBRATED)


def reference_crystal() -> CrystalParams:
    """1 mm LiIO3 slab anchored at QE = 1 for 200 GW/cm^2"""
    return calibrate_effective_nonlinearity(REFERENCE_ANCHOR_QE, REFERENCE_ANCHOR_INTENSITY)


def theta_for_quantum_efficiency(qe: float) -> float:
    if not 0.0 <= qe <= 1.0:
        raise DomainError(f"QE must lie in [0, 1], got {qe}")
    return math.asin(math.sqrt(qe))


def mirror_phase(displacement_x: float, lambda_in: float) -> float:
    """Mutual phase 2^(3/2) pi X / lambda introduced by a mirror displacement X"""
    _require_positive(lambda_in=lambda_in)
    return 2.0 ** 1.5 * math.pi * displacement_x / lambda_in


def fringe_period_nm(lambda_in: float) -> float:
    """Mirror displacement giving a 2 pi phase change, lambda / sqrt(2)"""
    _require_positive(lambda_in=lambda_in)
    return lambda_in / math.sqrt(2.0)


def _unit(vector: Sequence[float], name: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (2,):
        raise DomainError(f"{name} must be a planar 2-vector")
    if abs(np.linalg.norm(vector) - 1.0) > 1e-9:
        raise DomainError(f"{name} must be a unit vector, got norm {np.linalg.norm(vector)}")
    return vector


def wavevector_magnitude(wavelength_nm: float, index: float) -> float:
    """2 pi n / lambda in 1/um"""
    _require_positive(wavelength=wavelength_nm, index=index)
    return 2.0 * math.pi * index / (wavelength_nm * 1e-3)


def pmc_emission(k_in_direction: Sequence[float], k_p_direction: Sequence[float],
                 lambda_in: float, lambda_p: float, n_in: float, n_p: float, n_bar: float,
                 lambda_bar: Optional[float] = None) -> PhaseMatchResult:
    """
    Momentum-conserving up-converted wavevector kbar = k_in + k_p

    Returns the emission direction and the mismatch between the magnitude the
    UV mode needs (2 pi n_bar / lambda_bar) and the geometric sum's magnitude.

    Raises:
        DegenerateInputError: the input and pump wavevectors cancel
    """
    d_in = _unit(k_in_direction, "k_in_direction")
    d_p = _unit(k_p_direction, "k_p_direction")
    if lambda_bar is None:
        lambda_bar = sum_frequency_wavelength(lambda_in, lambda_p)
    k_sum = wavevector_magnitude(lambda_in, n_in) * d_in + wavevector_magnitude(lambda_p, n_p) * d_p
    length = float(np.linalg.norm(k_sum))
    if length < 1e-12:
        raise DegenerateInputError("Input and pump wavevectors cancel; emission direction undefined")
    direction = k_sum / length
    mismatch = wavevector_magnitude(lambda_bar, n_bar) - length
    return PhaseMatchResult(
        direction=(float(direction[0]), float(direction[1])),
        mismatch=float(mismatch),
        wavevector=(float(k_sum[0]), float(k_sum[1])),
    )


def phase_matched_uv_index(lambda_in: float, lambda_p: float, n_in: float, n_p: float) -> float:
    """UV index that makes collinear interaction exactly phase matched"""
    lambda_bar = sum_frequency_wavelength(lambda_in, lambda_p)
    return lambda_bar * (n_in / lambda_in + n_p / lambda_p)
