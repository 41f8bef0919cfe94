"""
Experiment runners

Each runner takes a validated ExperimentConfig, builds its optical network
from the element constructors and returns result objects. Analytic
probabilities and sampled counts are read off the same evolved state, so the
two paths share every line of network construction.

Interferometer layout (modes k1, k2 at lambda and kb1, kb2 at lambda_bar):

    photon -> k1 -> BS1(k1, k2) -> phase Phi on k2 -> converter
           -> BS2(k1, k2) -> D_B on k1, D_A on k2
           -> BS3(kb1, kb2) -> DBAR_B on kb1, DBAR_A on kb2

D_A is the port that is bright at Phi = 0. The pump phase Theta is applied to
the k2 pair only, so the UV fringe follows Psi = Phi + Theta.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from src import physics
from src.config import ExperimentConfig
from src.csv_utils import write_table
from src.detection import (
    CountSummary,
    DetectorSpec,
    G2Estimate,
    accumulate,
    count_trials,
    detector_firing_probabilities,
    g2_estimate,
    g2_from_counts,
    joint_firing_probability,
    sample_trials,
)
from src.elements import ConverterSpec, beam_splitter, compose, frequency_converter, phase_shifter
from src.errors import (
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    EmptyPostSelectionError,
    UndefinedEstimateError,
)
from src.file_utils import build_output_path, safe_write_json
from src.fock import (
    ElementUnitary,
    FockBasis,
    ModeSpec,
    Polarization,
    StateVector,
    apply,
    build_basis,
    coherent_state,
    fidelity,
    fock_state,
    project,
    superpose,
    vacuum,
)
from src.logging_utils import log_element, log_progress

ConverterBuilder = Callable[[FockBasis, ConverterSpec], ElementUnitary]

# measured QE at 200 and 1 GW/cm^2; overlay only, the plane-wave model does not reproduce them
EXPERIMENT_QE_POINTS = ((200.0, 0.4), (1.0, 3e-3))

MAX_AUTO_WORKERS = 8


@dataclass(frozen=True)
class CountRecord:
    label: str
    n_trials: int
    n_a: int
    n_b: int
    n_c: int


PUBLISHED_COUNTS = (
    CountRecord("method_a_ir", 100_000, 1015, 1223, 0),
    CountRecord("method_a_uv", 100_000, 810, 830, 0),
    CountRecord("method_b_pair1", 100_000, 2636, 713, 0),
)
PUBLISHED_BOUNDS = {"method_a_ir": 8.05e-2, "method_a_uv": 14.8e-2, "method_b_pair1": 5.3e-2}


@dataclass(frozen=True)
class Interferometer:
    basis: FockBasis
    k1: ModeSpec
    k2: ModeSpec
    kb1: ModeSpec
    kb2: ModeSpec

    def fringe_modes(self) -> Dict[str, ModeSpec]:
        return {"D_A": self.k2, "D_B": self.k1, "DBAR_A": self.kb2, "DBAR_B": self.kb1}

    def pair_modes(self) -> Dict[str, ModeSpec]:
        return {"D_1": self.k1, "D_2": self.k2, "DBAR_1": self.kb1, "DBAR_2": self.kb2}


@dataclass(frozen=True, eq=False)
class FringeRecord:
    index: int
    x_nm: float
    volts: float
    phi_rad: float
    psi_rad: float
    probabilities: Dict[str, float]
    counts: Optional[CountSummary] = None

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "index": self.index,
            "x_nm": self.x_nm,
            "volts": self.volts,
            "phi_rad": self.phi_rad,
            "psi_rad": self.psi_rad,
        }
        record.update({f"p_{label}": p for label, p in self.probabilities.items()})
        if self.counts is not None:
            record["n_trials"] = self.counts.n_trials
            record.update({f"n_{label}": n for label, n in self.counts.singles.items()})
        return record


@dataclass(frozen=True)
class FringeFit:
    mean: float
    amplitude: float
    visibility: float
    phase: float  # values ~ mean + amplitude cos(phi + phase)


@dataclass(frozen=True, eq=False)
class HbtResult:
    method: str
    pair: Tuple[str, str]
    theta: float
    phi_rad: Optional[float]
    psi_rad: Optional[float]
    probabilities: Dict[str, float]
    joint_probability: float
    counts: Optional[CountSummary] = None
    g2: Optional[G2Estimate] = None

    @property
    def analytic_g2(self) -> Optional[float]:
        p_a, p_b = (self.probabilities[label] for label in self.pair)
        if p_a <= 0 or p_b <= 0:
            return None
        return self.joint_probability / (p_a * p_b)


@dataclass(frozen=True)
class QeRow:
    tag: str
    intensity_gw_cm2: float
    qe: float


@dataclass(frozen=True, eq=False)
class EbitResult:
    theta_h: float
    theta_v: float
    alpha: complex
    beta: complex
    post_selection_probability: float
    expected_post_selection_probability: float
    fidelity: float
    counts: Optional[CountSummary] = None
    path_coincidences: Optional[int] = None


@dataclass(frozen=True)
class SingleShotResult:
    theta: float
    quantum_efficiency: float
    conversion_probability: float
    uv_fidelity: Optional[float]
    round_trip_fidelity: float
    vacuum_output_probability: float
    lambda_uv_nm: float
    lambda_down_nm: float


@dataclass(eq=False)
class ExperimentResult:
    kind: str
    records: List[Dict[str, Any]]
    metrics: Dict[str, Any]
    config: Optional[ExperimentConfig] = None

    def summary(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "seed": self.config.seed if self.config else None,
            "trials": self.config.trials if self.config else None,
            "config": self.config.to_dict() if self.config else None,
            "metrics": self.metrics,
        }


def _require_kind(config: ExperimentConfig, *kinds: str) -> None:
    if config.kind not in kinds:
        raise ConfigurationError(f"Experiment kind '{config.kind}' cannot run here (expected {' or '.join(kinds)})",
                                 key="kind")


def crystal_params(config: ExperimentConfig) -> physics.CrystalParams:
    """Crystal for QE evaluation, calibrated against the anchor in calibrated mode"""
    crystal = config.crystal
    base = physics.CrystalParams(length_l=crystal.length_mm, n_o=crystal.n_o, n_e_bar=crystal.n_e_bar,
                                 theta_m=crystal.theta_m_rad)
    if crystal.mode == physics.ABSOLUTE:
        if crystal.d2_pm_v is None:
            raise ConfigurationError("Absolute crystal mode needs 'd2_pm_v'", key="crystal.d2_pm_v")
        return replace(base, d2=crystal.d2_pm_v, epsilon0_convention=physics.ABSOLUTE)
    if crystal.anchor_qe is None or crystal.anchor_intensity_gw_cm2 is None:
        raise ConfigurationError("Calibrated crystal needs 'anchor_qe' and 'anchor_intensity_gw_cm2'",
                                 key="crystal.anchor_qe")
    return physics.calibrate_effective_nonlinearity(crystal.anchor_qe, crystal.anchor_intensity_gw_cm2, base)


def pump_spec(config: ExperimentConfig, intensity: Optional[float] = None) -> physics.PumpSpec:
    if intensity is None:
        intensity = config.pump.intensity_gw_cm2 or 0.0
    return physics.PumpSpec(wavelength_p=config.pump.lambda_nm, intensity=intensity,
                            phase_theta=config.pump.phase_rad)


def conversion_angle(config: ExperimentConfig) -> float:
    """Mixing angle from converter.theta_rad, converter.qe or the pump intensity, in that order"""
    converter = config.converter
    if converter is not None and converter.theta_rad is not None:
        return converter.theta_rad
    if converter is not None and converter.qe is not None:
        return physics.theta_for_quantum_efficiency(converter.qe)
    if config.pump.intensity_gw_cm2 is None:
        raise ConfigurationError("No conversion strength: set converter.theta_rad, converter.qe or "
                                 "pump.intensity_gw_cm2", key="converter.theta_rad")
    return physics.conversion_argument(pump_spec(config), crystal_params(config), config.lambda_nm)


def uv_wavelength(config: ExperimentConfig) -> float:
    return physics.sum_frequency_wavelength(config.lambda_nm, config.pump.lambda_nm)


def build_interferometer(config: ExperimentConfig) -> Interferometer:
    lambda_uv = uv_wavelength(config)
    k1 = ModeSpec("k1", config.lambda_nm, path="k1")
    k2 = ModeSpec("k2", config.lambda_nm, path="k2")
    kb1 = ModeSpec("kb1", lambda_uv, path="k1bar")
    kb2 = ModeSpec("kb2", lambda_uv, path="k2bar")
    return Interferometer(build_basis([k1, k2, kb1, kb2], config.cutoff), k1, k2, kb1, kb2)


def input_state(config: ExperimentConfig, basis: FockBasis, mode_1: ModeSpec, mode_2: ModeSpec) -> StateVector:
    """
    Input on (mode_1, mode_2): qubit alpha|1,0> + beta|0,1>, Fock occupation,
    or a truncated coherent state on mode_1
    """
    spec = config.input
    if spec.type == "coherent":
        return coherent_state(basis, mode_1, spec.gamma)
    if spec.type == "fock":
        if sum(spec.occupation) > basis.max_total_photons:
            raise ConfigurationError(
                f"Input occupation {spec.occupation} exceeds the cutoff of {basis.max_total_photons} photons",
                key="input.occupation")
        return fock_state(basis, {mode_1: spec.occupation[0], mode_2: spec.occupation[1]})
    return superpose([
        (spec.alpha, fock_state(basis, {mode_1: 1})),
        (spec.beta, fock_state(basis, {mode_2: 1})),
    ])


def build_detectors(config: ExperimentConfig, modes: Dict[str, ModeSpec]) -> List[DetectorSpec]:
    """Configured detectors; the UV background probability folds into the DBAR dark counts"""
    detectors = []
    for label, mode in modes.items():
        detector = config.detector(label)
        dark = detector.dark_count_probability
        if label.startswith("DBAR"):
            dark = 1.0 - (1.0 - dark) * (1.0 - config.uv_background_probability)
        detectors.append(DetectorSpec(label, mode, detector.efficiency, dark))
    return detectors


def ideal_detectors(modes: Dict[str, ModeSpec]) -> List[DetectorSpec]:
    return [DetectorSpec(label, mode) for label, mode in modes.items()]


def _log_elements(logger: Optional[logging.Logger], elements: Sequence[ElementUnitary]) -> None:
    if logger is None:
        return
    for element in elements:
        log_element(logger, element.name, element.unitarity_error(), element.basis.dimension)


def interferometer_converter(ifm: Interferometer, theta: float, pump_phase: float) -> ConverterSpec:
    return ConverterSpec(
        pairs=((ifm.k1, ifm.kb1), (ifm.k2, ifm.kb2)),
        theta=theta,
        pump_phase=pump_phase,
        pair_pump_phases=(0.0, pump_phase),
    )


def fringe_network(ifm: Interferometer, phi: float, theta: float, pump_phase: float,
                   converter_builder: ConverterBuilder = frequency_converter,
                   logger: Optional[logging.Logger] = None) -> ElementUnitary:
    """BS1 -> phase(Phi) on k2 -> converter -> BS2 on (k1, k2) and BS3 on (kb1, kb2)"""
    basis = ifm.basis
    elements = [
        beam_splitter(basis, ifm.k1, ifm.k2, 0.5),
        phase_shifter(basis, ifm.k2, phi),
        converter_builder(basis, interferometer_converter(ifm, theta, pump_phase)),
        beam_splitter(basis, ifm.k1, ifm.k2, 0.5),
        beam_splitter(basis, ifm.kb1, ifm.kb2, 0.5),
    ]
    _log_elements(logger, elements)
    return compose(elements)


def pair_network(ifm: Interferometer, theta: float, pump_phase: float,
                 converter_builder: ConverterBuilder = frequency_converter,
                 logger: Optional[logging.Logger] = None) -> ElementUnitary:
    """BS1 -> converter; detectors watch k_j and kb_j directly"""
    elements = [
        beam_splitter(ifm.basis, ifm.k1, ifm.k2, 0.5),
        converter_builder(ifm.basis, interferometer_converter(ifm, theta, pump_phase)),
    ]
    _log_elements(logger, elements)
    return compose(elements)


def _scan_axis(config: ExperimentConfig) -> List[Tuple[float, float]]:
    """(x_nm, phi_rad) per scan point"""
    scan = config.scan
    values = np.linspace(scan.start, scan.stop, scan.points)
    if scan.axis == "x":
        return [(float(x), physics.mirror_phase(float(x), config.lambda_nm)) for x in values]
    return [(float(phi) * config.lambda_nm / (2.0 ** 1.5 * math.pi), float(phi)) for phi in values]


def _fringe_point(index: int, x_nm: float, phi: float, config: ExperimentConfig, ifm: Interferometer,
                  theta: float, state_in: StateVector, detectors: List[DetectorSpec],
                  converter_builder: ConverterBuilder, logger: Optional[logging.Logger]) -> FringeRecord:
    pump_phase = config.pump.phase_rad
    network = fringe_network(ifm, phi, theta, pump_phase, converter_builder, logger)
    state = apply(network, state_in)
    probabilities = detector_firing_probabilities(state, ideal_detectors(ifm.fringe_modes()))
    counts = None
    if config.trials > 0:
        counts = count_trials(state, detectors, config.trials, seed=[config.seed, index], pairs=())
    return FringeRecord(
        index=index,
        x_nm=x_nm,
        volts=x_nm / config.piezo_nm_per_volt,
        phi_rad=phi,
        psi_rad=phi + pump_phase,
        probabilities=probabilities,
        counts=counts,
    )


def run_fringe_scan(config: ExperimentConfig, max_workers: Optional[int] = None,
                    logger: Optional[logging.Logger] = None,
                    converter_builder: ConverterBuilder = frequency_converter) -> List[FringeRecord]:
    """
    Dual-wavelength fringe scan

    Scan points run concurrently; point i samples from SeedSequence([seed, i])
    and records come back in scan order whatever the completion order.
    """
    _require_kind(config, "fringes")
    if config.scan is None:
        raise ConfigurationError("Missing required field 'scan'", key="scan")
    ifm = build_interferometer(config)
    theta = conversion_angle(config)
    state_in = input_state(config, ifm.basis, ifm.k1, ifm.k2)
    detectors = build_detectors(config, ifm.fringe_modes())
    points = _scan_axis(config)
    workers = max_workers or min(MAX_AUTO_WORKERS, len(points))

    if logger:
        logger.info(f"Fringe scan: {len(points)} points, theta={theta:.6g}, "
                    f"Theta={config.pump.phase_rad:.6g}, {workers} workers")

    records: List[Optional[FringeRecord]] = [None] * len(points)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [
            executor.submit(_fringe_point, i, x_nm, phi, config, ifm, theta, state_in, detectors,
                            converter_builder, logger)
            for i, (x_nm, phi) in enumerate(points)
        ]
        for i, future in enumerate(futures):
            records[i] = future.result()
            if logger and ((i + 1) % 25 == 0 or i + 1 == len(points)):
                log_progress(logger, i + 1, len(points), "scan point")
    return records


def fringe_fit(phi: Sequence[float], values: Sequence[float]) -> FringeFit:
    """
    Linear least squares of values on 1, cos(phi), sin(phi)

    Raises:
        DegenerateInputError: fewer than three distinct phases
    """
    phi = np.asarray(phi, dtype=float)
    values = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    coefficients, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < 3:
        raise DegenerateInputError("Fringe fit needs at least three distinct phases")
    mean, c, s = (float(v) for v in coefficients)
    amplitude = math.hypot(c, s)
    visibility = amplitude / mean if mean > 0 else 0.0
    return FringeFit(mean=mean, amplitude=amplitude, visibility=visibility, phase=math.atan2(-s, c))


def dominant_frequency_bin(values: Sequence[float]) -> int:
    """Index of the strongest non-zero frequency of the mean-removed signal"""
    values = np.asarray(values, dtype=float)
    if values.size < 4:
        raise DegenerateInputError("Need at least four samples for a spectrum")
    spectrum = np.abs(np.fft.rfft(values - values.mean()))
    return int(np.argmax(spectrum[1:]) + 1)


def _cosine(x, offset, amplitude, period, phase):
    return offset + amplitude * np.cos(2.0 * np.pi * x / period + phase)


def fringe_period(x: Sequence[float], values: Sequence[float]) -> float:
    """
    Fringe period on a uniform x grid: DFT peak, a least-squares period sweep
    around it, then a curve_fit polish

    Raises:
        DegenerateInputError: flat signal or too few samples
        DomainError: x is not uniformly increasing
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if x.size < 4 or x.size != values.size:
        raise DegenerateInputError("Need at least four (x, value) samples for a period")
    spacing = np.diff(x)
    if spacing[0] <= 0 or not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
        raise DomainError("Fringe period needs uniformly increasing x")
    if np.ptp(values) <= 1e-12 * max(1.0, float(np.max(np.abs(values)))):
        raise DegenerateInputError("Flat signal has no fringe period")

    k = dominant_frequency_bin(values)
    coarse = x.size * spacing[0] / k

    best = None
    for period in np.linspace(0.6 * coarse, 1.4 * coarse, 801):
        design = np.column_stack([np.ones_like(x), np.cos(2 * np.pi * x / period), np.sin(2 * np.pi * x / period)])
        coefficients = np.linalg.lstsq(design, values, rcond=None)[0]
        error = float(np.sum((design @ coefficients - values) ** 2))
        if best is None or error < best[0]:
            best = (error, period, coefficients)
    _, period0, (offset0, c, s) = best

    popt, _ = curve_fit(_cosine, x, values,
                        p0=[offset0, math.hypot(c, s), period0, math.atan2(-s, c)], maxfev=10_000)
    return float(abs(popt[2]))


def summarize_fringes(records: Sequence[FringeRecord], config: ExperimentConfig, theta: float) -> Dict[str, Any]:
    metrics: Dict[str, Any] = {
        "theta_rad": theta,
        "quantum_efficiency": math.sin(theta) ** 2,
        "pump_phase_rad": config.pump.phase_rad,
        "lambda_uv_nm": uv_wavelength(config),
        "expected_period_nm": physics.fringe_period_nm(config.lambda_nm),
        "points": len(records),
    }
    phi = [r.phi_rad for r in records]
    ir = [r.probabilities["D_A"] for r in records]
    uv = [r.probabilities["DBAR_A"] for r in records]
    try:
        ir_fit = fringe_fit(phi, ir)
        uv_fit = fringe_fit(phi, uv)
    except DegenerateInputError:
        return metrics
    metrics.update({
        "ir_visibility": ir_fit.visibility,
        "uv_visibility": uv_fit.visibility,
        "ir_phase_rad": ir_fit.phase,
        "uv_phase_rad": uv_fit.phase,
        "uv_phase_offset_rad": (math.remainder(uv_fit.phase - ir_fit.phase, 2 * math.pi)
                                if ir_fit.amplitude > 1e-12 and uv_fit.amplitude > 1e-12 else None),
    })

    if config.scan.axis == "x" and len(records) >= 8:
        x = [r.x_nm for r in records]
        for name, values in (("ir", ir), ("uv", uv)):
            try:
                metrics[f"{name}_period_nm"] = fringe_period(x, values)
                metrics[f"{name}_dft_bin"] = dominant_frequency_bin(values)
            except (DegenerateInputError, RuntimeError):
                metrics[f"{name}_period_nm"] = None
                metrics[f"{name}_dft_bin"] = None

    if config.trials > 0:
        n = config.trials
        for name, label in (("ir", "D_A"), ("uv", "DBAR_A")):
            rates = [r.counts.singles[label] / n for r in records]
            try:
                metrics[f"{name}_sampled_visibility"] = fringe_fit(phi, rates).visibility
            except DegenerateInputError:
                metrics[f"{name}_sampled_visibility"] = None
    return metrics


def run_hbt(config: ExperimentConfig, logger: Optional[logging.Logger] = None,
            converter_builder: ConverterBuilder = frequency_converter) -> HbtResult:
    """
    Method A (hbt_linear): the two output ports of BS2 (arm ir) or BS3 (arm uv)
    with the fringe phase at pi/2. Method B (hbt_nonlinear): D_j against DBAR_j
    across the converter.
    """
    _require_kind(config, "hbt_linear", "hbt_nonlinear")
    ifm = build_interferometer(config)
    theta = conversion_angle(config)
    pump_phase = config.pump.phase_rad
    state_in = input_state(config, ifm.basis, ifm.k1, ifm.k2)

    if config.kind == "hbt_linear":
        arm = config.hbt.arm if config.hbt else "ir"
        phi = math.pi / 2 if arm == "ir" else math.pi / 2 - pump_phase
        psi = phi + pump_phase
        network = fringe_network(ifm, phi, theta, pump_phase, converter_builder, logger)
        modes = ifm.fringe_modes()
        pair = ("D_A", "D_B") if arm == "ir" else ("DBAR_A", "DBAR_B")
        method = "A"
    else:
        j = config.hbt.pair if config.hbt else 1
        phi = psi = None
        network = pair_network(ifm, theta, pump_phase, converter_builder, logger)
        modes = ifm.pair_modes()
        pair = (f"D_{j}", f"DBAR_{j}")
        method = "B"

    state = apply(network, state_in)
    detectors = build_detectors(config, modes)
    probabilities = detector_firing_probabilities(state, detectors)
    joint = joint_firing_probability(state, detectors, pair)

    counts = g2 = None
    if config.trials > 0:
        counts = count_trials(state, detectors, config.trials, seed=config.seed, pairs=[pair])
        try:
            g2 = g2_estimate(counts, pair)
        except UndefinedEstimateError as e:
            if logger:
                logger.warning(f"g2 not estimated: {e}")
    if logger:
        logger.info(f"HBT method {method} on {pair[0]}&{pair[1]}: joint probability {joint:.3e}")
    return HbtResult(method=method, pair=pair, theta=theta, phi_rad=phi, psi_rad=psi,
                     probabilities=probabilities, joint_probability=joint, counts=counts, g2=g2)


def run_qe_curve(config: ExperimentConfig) -> List[QeRow]:
    """Model curve over the requested intensities plus tagged anchor and experiment overlay rows"""
    _require_kind(config, "qe_curve")
    crystal = crystal_params(config)
    curve = config.qe_curve
    rows = [
        QeRow("model", float(intensity),
              physics.quantum_efficiency(pump_spec(config, float(intensity)), crystal, config.lambda_nm))
        for intensity in np.linspace(curve.intensity_start_gw_cm2, curve.intensity_stop_gw_cm2, curve.points)
    ]
    if crystal.epsilon0_convention == physics.CALIBRATED:
        rows.append(QeRow("anchor", config.crystal.anchor_intensity_gw_cm2, config.crystal.anchor_qe))
    rows.extend(QeRow("experiment", intensity, qe) for intensity, qe in EXPERIMENT_QE_POINTS)
    return rows


def summarize_qe_curve(config: ExperimentConfig) -> Dict[str, Any]:
    crystal = crystal_params(config)

    def qe(intensity: float) -> float:
        return physics.quantum_efficiency(pump_spec(config, intensity), crystal, config.lambda_nm)

    unit_argument = physics.conversion_argument(pump_spec(config, 1.0), crystal, config.lambda_nm)
    return {
        "mode": crystal.epsilon0_convention,
        "coupling": crystal.d2,
        "qe_at_1_gw_cm2": qe(1.0),
        "qe_at_50_gw_cm2": qe(50.0),
        "qe_at_200_gw_cm2": qe(200.0),
        "first_maximum_intensity_gw_cm2": (math.pi / 2 / unit_argument) ** 2 if unit_argument > 0 else None,
    }


def _ebit_modes(config: ExperimentConfig) -> Dict[str, ModeSpec]:
    lambda_uv = uv_wavelength(config)
    modes = {}
    for path in ("1", "2"):
        for pol in (Polarization.H, Polarization.V):
            modes[f"k{path}{pol.value}"] = ModeSpec(f"k{path}{pol.value}", config.lambda_nm, pol, f"k{path}")
    for path in ("1", "2"):
        for pol in (Polarization.H, Polarization.V):
            modes[f"kb{path}{pol.value}"] = ModeSpec(f"kb{path}{pol.value}", lambda_uv, pol, f"k{path}bar")
    return modes


def run_ebit(config: ExperimentConfig, logger: Optional[logging.Logger] = None,
             converter_builder: ConverterBuilder = frequency_converter) -> EbitResult:
    """
    Up-convert alpha|HH> + beta|VV> on paths k1, k2 with two crossed Type I slabs

    Type I flips polarization, so IR H feeds UV V and IR V feeds UV H, and the
    converted target is alpha|VV>_bar + beta|HH>_bar. Post-selection keeps the
    trials with no IR photon and one UV photon on each path.

    Raises:
        EmptyPostSelectionError: no amplitude survives the post-selection
    """
    _require_kind(config, "ebit")
    if config.cutoff < 2:
        raise ConfigurationError("Ebit experiments need cutoff >= 2", key="cutoff")
    modes = _ebit_modes(config)
    basis = build_basis(list(modes.values()), config.cutoff)
    theta_h = conversion_angle(config)
    theta_v = config.converter.theta_v_rad if config.converter.theta_v_rad is not None else theta_h

    norm = math.hypot(abs(config.input.alpha), abs(config.input.beta))
    alpha, beta = config.input.alpha / norm, config.input.beta / norm
    state_in = superpose([
        (alpha, fock_state(basis, {"k1H": 1, "k2H": 1})),
        (beta, fock_state(basis, {"k1V": 1, "k2V": 1})),
    ])
    spec = ConverterSpec(
        pairs=((modes["k1H"], modes["kb1V"]), (modes["k1V"], modes["kb1H"]),
               (modes["k2H"], modes["kb2V"]), (modes["k2V"], modes["kb2H"])),
        theta=theta_h,
        pump_phase=config.pump.phase_rad,
        pair_thetas=(theta_h, theta_v, theta_h, theta_v),
    )
    converter = converter_builder(basis, spec)
    _log_elements(logger, [converter])
    state = apply(converter, state_in)

    ir_idx = [basis.mode_index(label) for label in ("k1H", "k1V", "k2H", "k2V")]
    path_1 = [basis.mode_index(label) for label in ("kb1H", "kb1V")]
    path_2 = [basis.mode_index(label) for label in ("kb2H", "kb2V")]

    def both_converted(occupation) -> bool:
        return (all(occupation[i] == 0 for i in ir_idx)
                and sum(occupation[i] for i in path_1) == 1
                and sum(occupation[i] for i in path_2) == 1)

    probability, selected = project(state, both_converted)
    if selected is None:
        raise EmptyPostSelectionError(
            f"No amplitude converts both photons (theta_h={theta_h:.6g}, theta_v={theta_v:.6g})")
    target = superpose([
        (alpha, fock_state(basis, {"kb1V": 1, "kb2V": 1})),
        (beta, fock_state(basis, {"kb1H": 1, "kb2H": 1})),
    ])
    expected = abs(alpha) ** 2 * math.sin(theta_h) ** 4 + abs(beta) ** 2 * math.sin(theta_v) ** 4

    counts = coincidences = None
    if config.trials > 0:
        detector_modes = {f"DBAR_{label[2:]}": modes[label] for label in ("kb1H", "kb1V", "kb2H", "kb2V")}
        outcomes = sample_trials(state, build_detectors(config, detector_modes), config.trials, config.seed)
        counts = accumulate(outcomes, pairs=[("DBAR_1H", "DBAR_2H"), ("DBAR_1V", "DBAR_2V"),
                                             ("DBAR_1H", "DBAR_2V"), ("DBAR_1V", "DBAR_2H")])
        fired = outcomes.fired
        coincidences = int(np.sum(fired[:, 0:2].any(axis=1) & fired[:, 2:4].any(axis=1)))

    return EbitResult(theta_h=theta_h, theta_v=theta_v, alpha=complex(alpha), beta=complex(beta),
                      post_selection_probability=probability, expected_post_selection_probability=expected,
                      fidelity=fidelity(target, selected), counts=counts, path_coincidences=coincidences)


def run_single_shot(config: ExperimentConfig, logger: Optional[logging.Logger] = None,
                    converter_builder: ConverterBuilder = frequency_converter) -> SingleShotResult:
    """
    Qubit alpha|1,0> + beta|0,1> on (k1, k2) straight through the converter

    Reports the conversion probability, the UV qubit fidelity after
    post-selection, the up-then-down round trip at theta = pi/2 and the
    vacuum-in vacuum-out probability.
    """
    _require_kind(config, "single_shot")
    ifm = build_interferometer(config)
    basis = ifm.basis
    theta = conversion_angle(config)
    pump_phase = config.pump.phase_rad
    state_in = input_state(config, basis, ifm.k1, ifm.k2)

    pairs = ((ifm.k1, ifm.kb1), (ifm.k2, ifm.kb2))
    converter = converter_builder(basis, ConverterSpec(pairs=pairs, theta=theta, pump_phase=pump_phase))
    full = converter_builder(basis, ConverterSpec(pairs=pairs, theta=math.pi / 2, pump_phase=pump_phase))
    _log_elements(logger, [converter, full])

    ir = (basis.mode_index(ifm.k1), basis.mode_index(ifm.k2))
    probability, selected = project(apply(converter, state_in),
                                    lambda occupation: occupation[ir[0]] == 0 and occupation[ir[1]] == 0)
    uv_fidelity = None
    if selected is not None:
        target = superpose([
            (config.input.alpha, fock_state(basis, {ifm.kb1: 1})),
            (config.input.beta, fock_state(basis, {ifm.kb2: 1})),
        ])
        uv_fidelity = fidelity(target, selected)

    round_trip = apply(full, apply(full, state_in))
    blank = vacuum(basis)
    lambda_uv = uv_wavelength(config)
    return SingleShotResult(
        theta=theta,
        quantum_efficiency=math.sin(theta) ** 2,
        conversion_probability=probability,
        uv_fidelity=uv_fidelity,
        round_trip_fidelity=fidelity(state_in, round_trip),
        vacuum_output_probability=fidelity(blank, apply(converter, blank)),
        lambda_uv_nm=lambda_uv,
        lambda_down_nm=physics.difference_frequency_wavelength(lambda_uv, config.pump.lambda_nm),
    )


def replay_counts(records: Sequence[CountRecord]) -> List[G2Estimate]:
    """g2 point estimates and bounds for raw (N, N_A, N_B, N_C) records"""
    return [g2_from_counts(r.n_trials, r.n_a, r.n_b, r.n_c, pair=(f"{r.label}:A", f"{r.label}:B"))
            for r in records]


def _g2_fields(g2: Optional[G2Estimate]) -> Dict[str, Any]:
    if g2 is None:
        return {}
    return {"g2_point": g2.point, "g2_upper_bound": g2.upper_bound}


def _count_fields(counts: CountSummary) -> Dict[str, Any]:
    fields = {"n_trials": counts.n_trials}
    fields.update({f"n_{label}": n for label, n in counts.singles.items()})
    fields.update({f"n_{a}_{b}": n for (a, b), n in counts.coincidences.items()})
    return fields


def replay_result(records: Sequence[CountRecord]) -> ExperimentResult:
    rows = []
    metrics: Dict[str, Any] = {}
    for record, estimate in zip(records, replay_counts(records)):
        rows.append({
            "label": record.label,
            "n_trials": record.n_trials,
            "n_a": record.n_a,
            "n_b": record.n_b,
            "n_c": record.n_c,
            "g2_point": estimate.point,
            "g2_upper_bound": estimate.upper_bound,
        })
        metrics[record.label] = {"g2_point": estimate.point, "g2_upper_bound": estimate.upper_bound}
        if record.label in PUBLISHED_BOUNDS:
            metrics[record.label]["published_bound"] = PUBLISHED_BOUNDS[record.label]
    return ExperimentResult(kind="replay_counts", records=rows, metrics=metrics)


def run_experiment(config: ExperimentConfig, max_workers: Optional[int] = None,
                   logger: Optional[logging.Logger] = None) -> ExperimentResult:
    """Run the experiment named by config.kind and flatten it into table rows plus headline metrics"""
    if config.kind == "fringes":
        records = run_fringe_scan(config, max_workers=max_workers, logger=logger)
        metrics = summarize_fringes(records, config, conversion_angle(config))
        return ExperimentResult(config.kind, [r.to_record() for r in records], metrics, config)

    if config.kind in ("hbt_linear", "hbt_nonlinear"):
        result = run_hbt(config, logger=logger)
        row: Dict[str, Any] = {"method": result.method, "pair": f"{result.pair[0]}&{result.pair[1]}"}
        row.update({f"p_{label}": p for label, p in result.probabilities.items()})
        row["p_joint"] = result.joint_probability
        if result.counts is not None:
            row.update(_count_fields(result.counts))
            row.update(_g2_fields(result.g2))
        metrics = {
            "method": result.method,
            "pair": list(result.pair),
            "theta_rad": result.theta,
            "quantum_efficiency": math.sin(result.theta) ** 2,
            "phi_rad": result.phi_rad,
            "psi_rad": result.psi_rad,
            "joint_probability": result.joint_probability,
            "analytic_g2": result.analytic_g2,
        }
        if result.counts is not None:
            metrics["coincidences"] = result.counts.coincidence(result.pair)
            metrics["singles"] = dict(result.counts.singles)
            metrics.update(_g2_fields(result.g2))
        return ExperimentResult(config.kind, [row], metrics, config)

    if config.kind == "qe_curve":
        rows = [{"tag": r.tag, "intensity_gw_cm2": r.intensity_gw_cm2, "qe": r.qe} for r in run_qe_curve(config)]
        return ExperimentResult(config.kind, rows, summarize_qe_curve(config), config)

    if config.kind == "ebit":
        result = run_ebit(config, logger=logger)
        row = {
            "theta_h_rad": result.theta_h,
            "theta_v_rad": result.theta_v,
            "alpha_re": result.alpha.real,
            "alpha_im": result.alpha.imag,
            "beta_re": result.beta.real,
            "beta_im": result.beta.imag,
            "post_selection_probability": result.post_selection_probability,
            "expected_post_selection_probability": result.expected_post_selection_probability,
            "fidelity": result.fidelity,
        }
        metrics = {key: row[key] for key in ("post_selection_probability", "expected_post_selection_probability",
                                             "fidelity", "theta_h_rad", "theta_v_rad")}
        if result.counts is not None:
            row.update(_count_fields(result.counts))
            row["n_path_coincidences"] = result.path_coincidences
            metrics["sampled_post_selection_rate"] = result.path_coincidences / config.trials
        return ExperimentResult(config.kind, [row], metrics, config)

    if config.kind == "single_shot":
        result = run_single_shot(config, logger=logger)
        row = {
            "theta_rad": result.theta,
            "quantum_efficiency": result.quantum_efficiency,
            "conversion_probability": result.conversion_probability,
            "uv_fidelity": result.uv_fidelity if result.uv_fidelity is not None else "",
            "round_trip_fidelity": result.round_trip_fidelity,
            "vacuum_output_probability": result.vacuum_output_probability,
            "lambda_uv_nm": result.lambda_uv_nm,
            "lambda_down_nm": result.lambda_down_nm,
        }
        metrics = dict(row)
        metrics["uv_fidelity"] = result.uv_fidelity
        return ExperimentResult(config.kind, [row], metrics, config)

    raise ConfigurationError(f"Unknown experiment kind '{config.kind}'", key="kind")


def emit_results(result: ExperimentResult, out_dir: str, logger: Optional[logging.Logger] = None) -> Tuple[str, str]:
    """Write <kind>.csv and <kind>_summary.json into out_dir"""
    table_path = build_output_path(out_dir, f"{result.kind}.csv")
    summary_path = build_output_path(out_dir, f"{result.kind}_summary.json")
    write_table(result.records, table_path, logger)
    safe_write_json(result.summary(), summary_path, logger)
    return table_path, summary_path
