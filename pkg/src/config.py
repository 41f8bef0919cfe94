"""
Experiment configuration

Configs are YAML documents. Every key is checked against the schema of the
experiment kind; errors name the offending key and the line it sits on.
"""

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

import yaml

from src.errors import ConfigurationError
from src.file_utils import sanitize_input_path

KINDS = ("fringes", "hbt_linear", "hbt_nonlinear", "qe_curve", "ebit", "single_shot")

DEFAULT_LAMBDA_NM = 876.1
DEFAULT_PUMP_LAMBDA_NM = 795.0
DEFAULT_PIEZO_NM_PER_VOLT = 0.7

# top-level keys each kind accepts
_COMMON_KEYS = {"kind", "seed", "trials", "cutoff", "lambda_nm", "pump", "crystal"}
KIND_KEYS = {
    "fringes": _COMMON_KEYS | {"converter", "input", "detectors", "scan", "piezo_nm_per_volt",
                               "uv_background_probability"},
    "hbt_linear": _COMMON_KEYS | {"converter", "input", "detectors", "hbt", "uv_background_probability"},
    "hbt_nonlinear": _COMMON_KEYS | {"converter", "input", "detectors", "hbt", "uv_background_probability"},
    "qe_curve": _COMMON_KEYS | {"qe_curve"},
    "ebit": _COMMON_KEYS | {"converter", "input", "detectors", "uv_background_probability"},
    "single_shot": _COMMON_KEYS | {"converter", "input"},
}
REQUIRED_KEYS = {
    "fringes": {"scan"},
    "qe_curve": {"qe_curve"},
}

DETECTOR_LABELS = {
    "fringes": ("D_A", "D_B", "DBAR_A", "DBAR_B"),
    "hbt_linear": ("D_A", "D_B", "DBAR_A", "DBAR_B"),
    "hbt_nonlinear": ("D_1", "D_2", "DBAR_1", "DBAR_2"),
    "ebit": ("DBAR_1H", "DBAR_1V", "DBAR_2H", "DBAR_2V"),
}
INPUT_TYPES = {
    "fringes": ("qubit", "fock", "coherent"),
    "hbt_linear": ("qubit", "fock", "coherent"),
    "hbt_nonlinear": ("qubit", "fock", "coherent"),
    "ebit": ("ebit",),
    "single_shot": ("qubit",),
}
INPUT_FIELDS = {
    "qubit": {"alpha", "beta"},
    "fock": {"occupation"},
    "coherent": {"gamma"},
    "ebit": {"alpha", "beta"},
}


@dataclass(frozen=True)
class PumpConfig:
    lambda_nm: float = DEFAULT_PUMP_LAMBDA_NM
    intensity_gw_cm2: Optional[float] = None
    phase_rad: float = 0.0


@dataclass(frozen=True)
class ConverterConfig:
    theta_rad: Optional[float] = None
    qe: Optional[float] = None
    theta_v_rad: Optional[float] = None


@dataclass(frozen=True)
class CrystalConfig:
    mode: str = "calibrated"
    length_mm: float = 1.0
    n_o: float = 1.86
    n_e_bar: float = 1.75
    theta_m_rad: float = 0.0
    d2_pm_v: Optional[float] = None
    anchor_qe: Optional[float] = 1.0
    anchor_intensity_gw_cm2: Optional[float] = 200.0


@dataclass(frozen=True)
class InputConfig:
    type: str = "qubit"
    alpha: Optional[complex] = None
    beta: Optional[complex] = None
    gamma: Optional[complex] = None
    occupation: Optional[Tuple[int, ...]] = None


@dataclass(frozen=True)
class DetectorConfig:
    label: str
    efficiency: float = 1.0
    dark_count_probability: float = 0.0


@dataclass(frozen=True)
class ScanConfig:
    axis: str = "x"
    start: float = 0.0
    stop: float = 0.0
    points: int = 1


@dataclass(frozen=True)
class HbtConfig:
    arm: Optional[str] = None
    pair: Optional[int] = None


@dataclass(frozen=True)
class QeCurveConfig:
    intensity_start_gw_cm2: float = 0.0
    intensity_stop_gw_cm2: float = 400.0
    points: int = 101


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    trials: int = 0
    cutoff: int = 2
    lambda_nm: float = DEFAULT_LAMBDA_NM
    piezo_nm_per_volt: float = DEFAULT_PIEZO_NM_PER_VOLT
    uv_background_probability: float = 0.0
    pump: PumpConfig = field(default_factory=PumpConfig)
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    converter: Optional[ConverterConfig] = None
    input: Optional[InputConfig] = None
    detectors: Tuple[DetectorConfig, ...] = ()
    scan: Optional[ScanConfig] = None
    hbt: Optional[HbtConfig] = None
    qe_curve: Optional[QeCurveConfig] = None

    def detector(self, label: str) -> DetectorConfig:
        for detector in self.detectors:
            if detector.label == label:
                return detector
        return DetectorConfig(label=label)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical echo; from_dict(to_dict()) reproduces the config"""
        out: Dict[str, Any] = {
            "kind": self.kind,
            "seed": self.seed,
            "trials": self.trials,
            "cutoff": self.cutoff,
            "lambda_nm": self.lambda_nm,
            "pump": _section_dict(self.pump),
            "crystal": _section_dict(self.crystal, keep_none=True),
        }
        allowed = KIND_KEYS[self.kind]
        if "piezo_nm_per_volt" in allowed:
            out["piezo_nm_per_volt"] = self.piezo_nm_per_volt
        if "uv_background_probability" in allowed:
            out["uv_background_probability"] = self.uv_background_probability
        if self.converter is not None:
            out["converter"] = _section_dict(self.converter)
        if self.input is not None:
            out["input"] = _section_dict(self.input)
        if self.detectors:
            out["detectors"] = [_section_dict(d) for d in self.detectors]
        if self.scan is not None:
            prefix = "x" if self.scan.axis == "x" else "phi"
            unit = "nm" if self.scan.axis == "x" else "rad"
            out["scan"] = {f"{prefix}_start_{unit}": self.scan.start,
                           f"{prefix}_stop_{unit}": self.scan.stop,
                           "points": self.scan.points}
        if self.hbt is not None:
            out["hbt"] = _section_dict(self.hbt)
        if self.qe_curve is not None:
            out["qe_curve"] = _section_dict(self.qe_curve)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> "ExperimentConfig":
        return _Parser(lines or {}).parse(data)


def _plain(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, tuple):
        return list(value)
    return value


def _section_dict(section: Any, keep_none: bool = False) -> Dict[str, Any]:
    return {f.name: _plain(getattr(section, f.name))
            for f in fields(section) if keep_none or getattr(section, f.name) is not None}


class _Parser:
    def __init__(self, lines: Dict[str, int]):
        self.lines = lines

    def error(self, message: str, key: str) -> ConfigurationError:
        return ConfigurationError(message, key=key, line=self.lines.get(key))

    def mapping(self, value: Any, key: str) -> Dict[str, Any]:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.error(f"'{key}' must be a mapping", key)
        return value

    def check_keys(self, data: Dict[str, Any], allowed: set, prefix: str = "") -> None:
        for key in data:
            if key not in allowed:
                path = f"{prefix}{key}"
                raise self.error(f"Unknown configuration key '{path}'", path)

    def number(self, data: Dict[str, Any], key: str, prefix: str, default: Any = None,
               minimum: Optional[float] = None, maximum: Optional[float] = None,
               strict_minimum: bool = False) -> Optional[float]:
        path = f"{prefix}{key}"
        if key not in data or data[key] is None:
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"'{path}' must be a number, got {value!r}", path)
        value = float(value)
        if not math.isfinite(value):
            raise self.error(f"'{path}' must be finite", path)
        if minimum is not None and (value < minimum or (strict_minimum and value == minimum)):
            bound = ">" if strict_minimum else ">="
            raise self.error(f"'{path}' must be {bound} {minimum}, got {value}", path)
        if maximum is not None and value > maximum:
            raise self.error(f"'{path}' must be <= {maximum}, got {value}", path)
        return value

    def integer(self, data: Dict[str, Any], key: str, prefix: str, default: Optional[int] = None,
                minimum: Optional[int] = None) -> Optional[int]:
        path = f"{prefix}{key}"
        if key not in data or data[key] is None:
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(f"'{path}' must be an integer, got {value!r}", path)
        if minimum is not None and value < minimum:
            raise self.error(f"'{path}' must be >= {minimum}, got {value}", path)
        return value

    def complex_value(self, data: Dict[str, Any], key: str, prefix: str) -> Optional[complex]:
        path = f"{prefix}{key}"
        if key not in data or data[key] is None:
            return None
        value = data[key]
        if isinstance(value, dict):
            self.check_keys(value, {"re", "im"}, f"{path}.")
            re = self.number(value, "re", f"{path}.", default=0.0)
            im = self.number(value, "im", f"{path}.", default=0.0)
            return complex(re, im)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"'{path}' must be a number or a {{re, im}} mapping", path)
        return complex(float(value), 0.0)

    def parse(self, data: Any) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigurationError("Config file must contain a mapping at the top level")
        if "kind" not in data:
            raise ConfigurationError("Missing required field 'kind'", key="kind")
        kind = data["kind"]
        if kind not in KINDS:
            raise self.error(f"Unknown experiment kind {kind!r} (valid: {', '.join(KINDS)})", "kind")

        known = set().union(*KIND_KEYS.values())
        for key in data:
            if key not in known:
                raise self.error(f"Unknown configuration key '{key}'", key)
            if key not in KIND_KEYS[kind]:
                raise self.error(f"Key '{key}' is not used by experiment kind '{kind}'", key)
        for key in sorted(REQUIRED_KEYS.get(kind, ())):
            if key not in data:
                raise ConfigurationError(f"Missing required field '{key}' for experiment kind '{kind}'", key=key)

        seed = self.integer(data, "seed", "", default=0, minimum=0)
        trials = self.integer(data, "trials", "", default=0, minimum=0)
        cutoff = self.integer(data, "cutoff", "", default=2, minimum=1)
        lambda_nm = self.number(data, "lambda_nm", "", default=DEFAULT_LAMBDA_NM, minimum=0, strict_minimum=True)
        piezo = self.number(data, "piezo_nm_per_volt", "", default=DEFAULT_PIEZO_NM_PER_VOLT,
                            minimum=0, strict_minimum=True)
        background = self.number(data, "uv_background_probability", "", default=0.0, minimum=0.0, maximum=0.999999)

        config = ExperimentConfig(
            kind=kind,
            seed=seed,
            trials=trials,
            cutoff=cutoff,
            lambda_nm=lambda_nm,
            piezo_nm_per_volt=piezo,
            uv_background_probability=background,
            pump=self.pump(self.mapping(data.get("pump"), "pump")),
            crystal=self.crystal(self.mapping(data.get("crystal"), "crystal")),
            converter=self.converter(kind, data),
            input=self.input(kind, data),
            detectors=self.detectors(kind, data.get("detectors")),
            scan=self.scan(data) if "scan" in data else None,
            hbt=self.hbt(kind, data),
            qe_curve=self.qe_curve(data) if kind == "qe_curve" else None,
        )
        self.check_conversion(config)
        return config

    def pump(self, data: Dict[str, Any]) -> PumpConfig:
        self.check_keys(data, {"lambda_nm", "intensity_gw_cm2", "phase_rad"}, "pump.")
        return PumpConfig(
            lambda_nm=self.number(data, "lambda_nm", "pump.", DEFAULT_PUMP_LAMBDA_NM, minimum=0, strict_minimum=True),
            intensity_gw_cm2=self.number(data, "intensity_gw_cm2", "pump.", None, minimum=0),
            phase_rad=self.number(data, "phase_rad", "pump.", 0.0),
        )

    def crystal(self, data: Dict[str, Any]) -> CrystalConfig:
        self.check_keys(data, {f.name for f in fields(CrystalConfig)}, "crystal.")
        mode = data.get("mode", "calibrated")
        if mode not in ("calibrated", "absolute"):
            raise self.error(f"'crystal.mode' must be 'calibrated' or 'absolute', got {mode!r}", "crystal.mode")
        defaults = CrystalConfig()
        anchor_qe = data["anchor_qe"] if "anchor_qe" in data else defaults.anchor_qe
        anchor_intensity = (data["anchor_intensity_gw_cm2"] if "anchor_intensity_gw_cm2" in data
                            else defaults.anchor_intensity_gw_cm2)
        return CrystalConfig(
            mode=mode,
            length_mm=self.number(data, "length_mm", "crystal.", defaults.length_mm, minimum=0, strict_minimum=True),
            n_o=self.number(data, "n_o", "crystal.", defaults.n_o, minimum=1),
            n_e_bar=self.number(data, "n_e_bar", "crystal.", defaults.n_e_bar, minimum=1),
            theta_m_rad=self.number(data, "theta_m_rad", "crystal.", defaults.theta_m_rad),
            d2_pm_v=self.number(data, "d2_pm_v", "crystal.", None),
            anchor_qe=None if anchor_qe is None else self.number(
                data, "anchor_qe", "crystal.", defaults.anchor_qe, minimum=0, maximum=1, strict_minimum=True),
            anchor_intensity_gw_cm2=None if anchor_intensity is None else self.number(
                data, "anchor_intensity_gw_cm2", "crystal.", defaults.anchor_intensity_gw_cm2,
                minimum=0, strict_minimum=True),
        )

    def converter(self, kind: str, data: Dict[str, Any]) -> Optional[ConverterConfig]:
        if "converter" not in KIND_KEYS[kind]:
            return None
        section = self.mapping(data.get("converter"), "converter")
        allowed = {"theta_rad", "qe"} | ({"theta_v_rad"} if kind == "ebit" else set())
        self.check_keys(section, allowed, "converter.")
        converter = ConverterConfig(
            theta_rad=self.number(section, "theta_rad", "converter."),
            qe=self.number(section, "qe", "converter.", minimum=0, maximum=1),
            theta_v_rad=self.number(section, "theta_v_rad", "converter."),
        )
        if converter.theta_rad is not None and converter.qe is not None:
            raise self.error("Give either 'converter.theta_rad' or 'converter.qe', not both", "converter.qe")
        return converter

    def check_conversion(self, config: ExperimentConfig) -> None:
        crystal = config.crystal
        if crystal.mode == "calibrated" and (crystal.anchor_qe is None or crystal.anchor_intensity_gw_cm2 is None):
            if config.kind == "qe_curve" or config.pump.intensity_gw_cm2 is not None:
                raise ConfigurationError("Calibrated crystal needs 'anchor_qe' and 'anchor_intensity_gw_cm2'",
                                         key="crystal.anchor_qe", line=self.lines.get("crystal.anchor_qe"))
        if crystal.mode == "absolute" and crystal.d2_pm_v is None:
            if config.kind == "qe_curve" or config.pump.intensity_gw_cm2 is not None:
                raise ConfigurationError("Absolute crystal mode needs 'd2_pm_v'", key="crystal.d2_pm_v",
                                         line=self.lines.get("crystal"))
        if config.converter is None:
            return
        if config.converter.theta_rad is None and config.converter.qe is None:
            if config.pump.intensity_gw_cm2 is None:
                raise ConfigurationError(
                    "Missing required field 'converter.theta_rad' (or 'converter.qe', or 'pump.intensity_gw_cm2')",
                    key="converter.theta_rad", line=self.lines.get("converter"))

    def input(self, kind: str, data: Dict[str, Any]) -> Optional[InputConfig]:
        if "input" not in KIND_KEYS[kind]:
            return None
        section = self.mapping(data.get("input"), "input")
        default_type = "ebit" if kind == "ebit" else "qubit"
        input_type = section.get("type", default_type)
        if input_type not in INPUT_TYPES[kind]:
            raise self.error(
                f"Input type {input_type!r} not supported by '{kind}' (valid: {', '.join(INPUT_TYPES[kind])})",
                "input.type")
        self.check_keys(section, {"type"} | INPUT_FIELDS[input_type], "input.")

        if input_type in ("qubit", "ebit"):
            alpha = self.complex_value(section, "alpha", "input.")
            beta = self.complex_value(section, "beta", "input.")
            if alpha is None and beta is None:
                if kind in ("ebit", "single_shot"):
                    alpha = beta = complex(2 ** -0.5, 0.0)
                else:
                    alpha, beta = complex(1.0, 0.0), complex(0.0, 0.0)
            alpha = complex(0.0, 0.0) if alpha is None else alpha
            beta = complex(0.0, 0.0) if beta is None else beta
            if abs(alpha) == 0 and abs(beta) == 0:
                raise self.error("'input.alpha' and 'input.beta' cannot both be zero", "input.alpha")
            return InputConfig(type=input_type, alpha=alpha, beta=beta)
        if input_type == "coherent":
            gamma = self.complex_value(section, "gamma", "input.")
            if gamma is None:
                raise ConfigurationError("Missing required field 'input.gamma'", key="input.gamma",
                                         line=self.lines.get("input"))
            return InputConfig(type=input_type, gamma=gamma)
        occupation = section.get("occupation")
        if (not isinstance(occupation, list) or len(occupation) != 2
                or any(isinstance(n, bool) or not isinstance(n, int) or n < 0 for n in occupation)):
            raise ConfigurationError("'input.occupation' must list two non-negative photon numbers",
                                     key="input.occupation", line=self.lines.get("input.occupation",
                                                                                 self.lines.get("input")))
        return InputConfig(type=input_type, occupation=tuple(occupation))

    def detectors(self, kind: str, value: Any) -> Tuple[DetectorConfig, ...]:
        if value is None:
            return ()
        if not isinstance(value, list):
            raise self.error("'detectors' must be a list", "detectors")
        allowed = DETECTOR_LABELS[kind]
        parsed: List[DetectorConfig] = []
        for i, entry in enumerate(value):
            prefix = f"detectors[{i}]."
            entry = self.mapping(entry, f"detectors[{i}]")
            self.check_keys(entry, {"label", "efficiency", "dark_count_probability"}, prefix)
            label = entry.get("label")
            if label not in allowed:
                raise self.error(f"Detector label {label!r} not used by '{kind}' (valid: {', '.join(allowed)})",
                                 f"{prefix}label")
            if any(d.label == label for d in parsed):
                raise self.error(f"Duplicate detector label {label!r}", f"{prefix}label")
            parsed.append(DetectorConfig(
                label=label,
                efficiency=self.number(entry, "efficiency", prefix, 1.0, minimum=0, maximum=1),
                dark_count_probability=self.number(entry, "dark_count_probability", prefix, 0.0,
                                                   minimum=0, maximum=0.999999),
            ))
        return tuple(parsed)

    def scan(self, data: Dict[str, Any]) -> ScanConfig:
        section = self.mapping(data.get("scan"), "scan")
        self.check_keys(section, {"x_start_nm", "x_stop_nm", "x_step_nm",
                                  "phi_start_rad", "phi_stop_rad", "phi_step_rad", "points"}, "scan.")
        has_x = any(k.startswith("x_") for k in section)
        has_phi = any(k.startswith("phi_") for k in section)
        if has_x == has_phi:
            raise self.error("Scan needs either x_*_nm or phi_*_rad keys (exactly one axis)", "scan")
        axis, unit = ("x", "nm") if has_x else ("phi", "rad")
        for bound in ("start", "stop"):
            if f"{axis}_{bound}_{unit}" not in section:
                raise ConfigurationError(f"Missing required field 'scan.{axis}_{bound}_{unit}'",
                                         key=f"scan.{axis}_{bound}_{unit}", line=self.lines.get("scan"))
        start = self.number(section, f"{axis}_start_{unit}", "scan.")
        stop = self.number(section, f"{axis}_stop_{unit}", "scan.")
        step_key = f"{axis}_step_{unit}"
        if ("points" in section) == (step_key in section):
            raise self.error(f"Scan needs exactly one of 'points' or '{step_key}'", "scan")
        if "points" in section:
            points = self.integer(section, "points", "scan.", minimum=1)
        else:
            step = self.number(section, step_key, "scan.", minimum=0, strict_minimum=True)
            if stop < start:
                raise self.error("Scan stop must not be below start", f"scan.{axis}_stop_{unit}")
            points = int(math.floor((stop - start) / step + 1e-9)) + 1
            stop = start + (points - 1) * step
        if points > 1 and stop == start:
            raise self.error("Scan with several points needs stop != start", f"scan.{axis}_stop_{unit}")
        return ScanConfig(axis=axis, start=start, stop=stop, points=points)

    def hbt(self, kind: str, data: Dict[str, Any]) -> Optional[HbtConfig]:
        if kind == "hbt_linear":
            section = self.mapping(data.get("hbt"), "hbt")
            self.check_keys(section, {"arm"}, "hbt.")
            arm = section.get("arm", "ir")
            if arm not in ("ir", "uv"):
                raise self.error(f"'hbt.arm' must be 'ir' or 'uv', got {arm!r}", "hbt.arm")
            return HbtConfig(arm=arm)
        if kind == "hbt_nonlinear":
            section = self.mapping(data.get("hbt"), "hbt")
            self.check_keys(section, {"pair"}, "hbt.")
            pair = section.get("pair", 1)
            if pair not in (1, 2) or isinstance(pair, bool):
                raise self.error(f"'hbt.pair' must be 1 or 2, got {pair!r}", "hbt.pair")
            return HbtConfig(pair=pair)
        return None

    def qe_curve(self, data: Dict[str, Any]) -> QeCurveConfig:
        section = self.mapping(data.get("qe_curve"), "qe_curve")
        self.check_keys(section, {f.name for f in fields(QeCurveConfig)}, "qe_curve.")
        defaults = QeCurveConfig()
        curve = QeCurveConfig(
            intensity_start_gw_cm2=self.number(section, "intensity_start_gw_cm2", "qe_curve.",
                                               defaults.intensity_start_gw_cm2, minimum=0),
            intensity_stop_gw_cm2=self.number(section, "intensity_stop_gw_cm2", "qe_curve.",
                                              defaults.intensity_stop_gw_cm2, minimum=0),
            points=self.integer(section, "points", "qe_curve.", defaults.points, minimum=2),
        )
        if curve.intensity_stop_gw_cm2 <= curve.intensity_start_gw_cm2:
            raise self.error("QE curve stop intensity must exceed the start", "qe_curve.intensity_stop_gw_cm2")
        return curve


def _line_map(node: yaml.Node, prefix: str = "", lines: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    # dotted key path -> 1-based line of the key
    lines = {} if lines is None else lines
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}{key_node.value}"
            lines[path] = key_node.start_mark.line + 1
            _line_map(value_node, f"{path}.", lines)
    elif isinstance(node, yaml.SequenceNode):
        base = prefix[:-1]
        for i, item in enumerate(node.value):
            lines[f"{base}[{i}]"] = item.start_mark.line + 1
            _line_map(item, f"{base}[{i}].", lines)
    return lines


def load_config_text(text: str) -> ExperimentConfig:
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ConfigurationError("Config file is empty")
        data = loader.construct_document(node)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigurationError(f"Malformed config: {e}", line=mark.line + 1 if mark else None) from e
    finally:
        loader.dispose()
    return ExperimentConfig.from_dict(data, _line_map(node))


def parse_config(path: str) -> ExperimentConfig:
    """
    Read and validate a YAML experiment config

    Raises:
        ConfigurationError: unreadable file, malformed YAML, unknown keys,
            missing required fields or invalid values
    """
    try:
        safe_path = sanitize_input_path(path)
    except ValueError as e:
        raise ConfigurationError(str(e)) from e
    try:
        with open(safe_path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {safe_path}: {e}") from e
    return load_config_text(text)


def apply_overrides(config: ExperimentConfig, seed: Optional[int] = None, trials: Optional[int] = None,
                    analytic_only: bool = False) -> ExperimentConfig:
    """Command-line overrides on top of a parsed config"""
    if seed is not None:
        if seed < 0:
            raise ConfigurationError(f"--seed must be non-negative, got {seed}", key="seed")
        config = replace(config, seed=seed)
    if trials is not None:
        if trials < 0:
            raise ConfigurationError(f"--trials must be non-negative, got {trials}", key="trials")
        config = replace(config, trials=trials)
    if analytic_only:
        config = replace(config, trials=0)
    return config
