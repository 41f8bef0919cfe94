"""
Threshold photodetection, coincidence counting and g2(0) estimators

Trials are perfectly gated: one trial draws one joint photon-number outcome
from the state and decides every detector independently. Sampling runs in
fixed blocks of TRIAL_BLOCK trials, block b drawing from the b-th child of the
master SeedSequence, so counts depend only on the seed and never on how the
blocks are scheduled.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.errors import ConfigurationError, DomainError, UndefinedEstimateError
from src.fock import ModeSpec, StateVector

TRIAL_BLOCK = 10_000

Pair = Tuple[str, str]
SeedLike = Union[int, Sequence[int], np.random.SeedSequence]


@dataclass(frozen=True)
class DetectorSpec:
    """Non-number-resolving detector watching one mode"""
    label: str
    mode: ModeSpec
    efficiency: float = 1.0
    dark_count_probability: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise DomainError(f"Detector '{self.label}' efficiency must lie in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_count_probability < 1.0:
            raise DomainError(
                f"Detector '{self.label}' dark count probability must lie in [0, 1), "
                f"got {self.dark_count_probability}")

    def firing_probability(self, photons: np.ndarray) -> np.ndarray:
        """1 - (1 - qe)^n (1 - p_dark) for n photons on the mode"""
        photons = np.asarray(photons)
        return 1.0 - (1.0 - self.efficiency) ** photons * (1.0 - self.dark_count_probability)


@dataclass
class CountSummary:
    n_trials: int
    singles: Dict[str, int]
    coincidences: Dict[Pair, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, count in [*self.singles.items(), *self.coincidences.items()]:
            if count < 0 or count > self.n_trials:
                raise DomainError(f"Count {name}={count} outside [0, {self.n_trials}]")

    def coincidence(self, pair: Pair) -> int:
        a, b = pair
        if (a, b) in self.coincidences:
            return self.coincidences[(a, b)]
        if (b, a) in self.coincidences:
            return self.coincidences[(b, a)]
        raise ConfigurationError(f"No coincidence counter defined for pair {a}&{b}")

    def merge(self, other: "CountSummary") -> "CountSummary":
        """Commutative reduction of two disjoint trial sets"""
        if set(self.singles) != set(other.singles) or set(self.coincidences) != set(other.coincidences):
            raise ConfigurationError("Cannot merge count summaries with different counters")
        return CountSummary(
            n_trials=self.n_trials + other.n_trials,
            singles={k: self.singles[k] + other.singles[k] for k in self.singles},
            coincidences={k: self.coincidences[k] + other.coincidences[k] for k in self.coincidences},
        )

    def to_record(self) -> Dict[str, int]:
        """Flat record: n_trials, one column per detector, one per pair as 'A&B'"""
        record = {"n_trials": self.n_trials}
        record.update(self.singles)
        record.update({f"{a}&{b}": count for (a, b), count in self.coincidences.items()})
        return record


@dataclass(frozen=True, eq=False)
class TrialOutcomes:
    labels: Tuple[str, ...]
    fired: np.ndarray  # bool, shape (n_trials, n_detectors)

    def __len__(self) -> int:
        return int(self.fired.shape[0])

    def as_sets(self) -> List[FrozenSet[str]]:
        return [frozenset(label for label, hit in zip(self.labels, row) if hit) for row in self.fired]


@dataclass(frozen=True)
class G2Estimate:
    pair: Pair
    n_trials: int
    n_a: int
    n_b: int
    n_c: int
    point: float
    upper_bound: float


def _seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def validate_detectors(state: StateVector, detectors: Sequence[DetectorSpec]) -> None:
    """
    Raises:
        ConfigurationError: two detectors on one mode or a repeated label
        DomainError: detector mode outside the state's basis
    """
    seen_modes: Dict[str, str] = {}
    seen_labels: Set[str] = set()
    for detector in detectors:
        state.basis.mode_index(detector.mode)
        if detector.label in seen_labels:
            raise ConfigurationError(f"Duplicate detector label '{detector.label}'")
        if detector.mode.label in seen_modes:
            raise ConfigurationError(
                f"Detectors '{seen_modes[detector.mode.label]}' and '{detector.label}' "
                f"both watch mode '{detector.mode.label}'")
        seen_labels.add(detector.label)
        seen_modes[detector.mode.label] = detector.label


def _firing_table(state: StateVector, detectors: Sequence[DetectorSpec]) -> np.ndarray:
    # rows: basis states, columns: detectors
    table = np.empty((state.basis.dimension, len(detectors)))
    for d, detector in enumerate(detectors):
        photons = state.basis.occupations[:, state.basis.mode_index(detector.mode)]
        table[:, d] = detector.firing_probability(photons)
    return table


def _outcome_distribution(state: StateVector) -> np.ndarray:
    probabilities = state.probabilities()
    return probabilities / probabilities.sum()


def detector_firing_probabilities(state: StateVector, detectors: Sequence[DetectorSpec]) -> Dict[str, float]:
    """Exact per-trial firing probability of every detector"""
    validate_detectors(state, detectors)
    marginal = state.probabilities() @ _firing_table(state, detectors)
    return {detector.label: float(p) for detector, p in zip(detectors, marginal)}


def joint_firing_probability(state: StateVector, detectors: Sequence[DetectorSpec], pair: Pair) -> float:
    """Exact per-trial probability that both detectors of `pair` fire"""
    validate_detectors(state, detectors)
    labels = [detector.label for detector in detectors]
    for label in pair:
        if label not in labels:
            raise ConfigurationError(f"Unknown detector '{label}' in pair {pair}")
    table = _firing_table(state, detectors)
    both = table[:, labels.index(pair[0])] * table[:, labels.index(pair[1])]
    return float(state.probabilities() @ both)


def sample_trial(state: StateVector, detectors: Sequence[DetectorSpec],
                 rng: np.random.Generator) -> FrozenSet[str]:
    """Labels of the detectors that fire in one trial"""
    validate_detectors(state, detectors)
    table = _firing_table(state, detectors)
    outcome = rng.choice(state.basis.dimension, p=_outcome_distribution(state))
    draws = rng.random(len(detectors))
    return frozenset(d.label for d, hit in zip(detectors, draws < table[outcome]) if hit)


def _sample_block(table: np.ndarray, distribution: np.ndarray, size: int,
                  seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(len(distribution), size=size, p=distribution)
    draws = rng.random((size, table.shape[1]))
    return draws < table[outcomes]


def _blocks(n_trials: int, seed: SeedLike) -> List[Tuple[int, np.random.SeedSequence]]:
    n_blocks = math.ceil(n_trials / TRIAL_BLOCK)
    # explicit spawn keys: SeedSequence.spawn would advance the parent's counter
    parent = _seed_sequence(seed)
    children = [
        np.random.SeedSequence(parent.entropy, spawn_key=parent.spawn_key + (b,), pool_size=parent.pool_size)
        for b in range(n_blocks)
    ]
    return [(min(TRIAL_BLOCK, n_trials - b * TRIAL_BLOCK), child) for b, child in enumerate(children)]


def sample_trials(state: StateVector, detectors: Sequence[DetectorSpec], n_trials: int,
                  seed: SeedLike) -> TrialOutcomes:
    """Firing pattern of every detector over n_trials independent trials"""
    if n_trials < 0:
        raise DomainError(f"Trial count must be non-negative, got {n_trials}")
    validate_detectors(state, detectors)
    table = _firing_table(state, detectors)
    distribution = _outcome_distribution(state)
    labels = tuple(detector.label for detector in detectors)
    blocks = [_sample_block(table, distribution, size, child) for size, child in _blocks(n_trials, seed)]
    fired = np.concatenate(blocks) if blocks else np.zeros((0, len(detectors)), dtype=bool)
    return TrialOutcomes(labels, fired)


def accumulate(outcomes: Union[TrialOutcomes, Iterable[Iterable[str]]], pairs: Sequence[Pair],
               labels: Optional[Sequence[str]] = None) -> CountSummary:
    """
    Singles per detector and coincidences per defined pair

    Args:
        outcomes: sampled trials, or one collection of fired labels per trial
        pairs: detector pairs to count coincidences for
        labels: detector universe; required when outcomes are plain label sets

    Raises:
        ConfigurationError: a pair names a detector outside the universe
    """
    if isinstance(outcomes, TrialOutcomes):
        labels = outcomes.labels
        fired = outcomes.fired
    else:
        if labels is None:
            raise ConfigurationError("Detector labels are required to accumulate label sets")
        labels = tuple(labels)
        trials = [set(trial) for trial in outcomes]
        for trial in trials:
            unknown = trial.difference(labels)
            if unknown:
                raise ConfigurationError(f"Trial outcome names unknown detectors: {', '.join(sorted(unknown))}")
        fired = np.array([[label in trial for label in labels] for trial in trials], dtype=bool)
        fired = fired.reshape(len(trials), len(labels))

    column = {label: i for i, label in enumerate(labels)}
    for pair in pairs:
        for label in pair:
            if label not in column:
                raise ConfigurationError(f"Unknown detector '{label}' in pair {pair[0]}&{pair[1]}")

    singles = {label: int(fired[:, column[label]].sum()) for label in labels}
    coincidences = {
        (a, b): int(np.logical_and(fired[:, column[a]], fired[:, column[b]]).sum())
        for a, b in pairs
    }
    return CountSummary(n_trials=int(fired.shape[0]), singles=singles, coincidences=coincidences)


def count_trials(state: StateVector, detectors: Sequence[DetectorSpec], n_trials: int,
                 seed: SeedLike, pairs: Sequence[Pair]) -> CountSummary:
    """sample_trials + accumulate, block by block, without keeping every outcome"""
    if n_trials < 0:
        raise DomainError(f"Trial count must be non-negative, got {n_trials}")
    validate_detectors(state, detectors)
    labels = tuple(detector.label for detector in detectors)
    table = _firing_table(state, detectors)
    distribution = _outcome_distribution(state)
    summary = accumulate(TrialOutcomes(labels, np.zeros((0, len(labels)), dtype=bool)), pairs)
    for size, child in _blocks(n_trials, seed):
        block = TrialOutcomes(labels, _sample_block(table, distribution, size, child))
        summary = summary.merge(accumulate(block, pairs))
    return summary


def g2_from_counts(n_trials: int, n_a: int, n_b: int, n_c: int, pair: Pair = ("A", "B")) -> G2Estimate:
    """
    g2(0) ~ N_C N / (N_A N_B); the upper bound uses max(N_C, 1) in the numerator

    Raises:
        UndefinedEstimateError: zero trials or zero singles on either detector
    """
    if n_trials <= 0 or n_a <= 0 or n_b <= 0:
        raise UndefinedEstimateError(
            f"g2 undefined for N={n_trials}, N_{pair[0]}={n_a}, N_{pair[1]}={n_b}")
    denominator = n_a * n_b
    return G2Estimate(
        pair=tuple(pair),
        n_trials=n_trials,
        n_a=n_a,
        n_b=n_b,
        n_c=n_c,
        point=n_c * n_trials / denominator,
        upper_bound=max(n_c, 1) * n_trials / denominator,
    )


def g2_estimate(summary: CountSummary, pair: Pair) -> G2Estimate:
    """Estimate for one detector pair; same formula for same-wavelength and IR/UV pairs"""
    a, b = pair
    for label in pair:
        if label not in summary.singles:
            raise ConfigurationError(f"Unknown detector '{label}' in pair {a}&{b}")
    return g2_from_counts(summary.n_trials, summary.singles[a], summary.singles[b],
                          summary.coincidence(pair), pair=pair)
