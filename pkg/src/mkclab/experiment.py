"""Seeded Monte Carlo rounds under three model families.

Every round selects one of the four combos uniformly, selects a detector
triplet and produces three +-1 outcomes:

* ``QUANTUM``: the triplet comes from a correlated rational triplet set and
  the outcomes are drawn from the Born probabilities on the GHZ state.
* ``CORRELATED_HV``: same triplet set and outcome law, but realized as a
  hidden-variable model. The hidden value is drawn first and the context
  afterwards, and the outcome is a fixed function of both. This is what a
  model without product-form triplet sets is able to do.
* ``PRODUCT_HV``: each detector independently takes a rational direction near
  the axis its combo requires, and a valuation drawn from a fixed atom
  distribution (the max-min witness by default) supplies the three signs.

All randomness comes from the counter-based generator in ``_kernels``: the
draws for round i depend only on (seed, i), so results are independent of
execution order and reruns are bit-identical.
"""
from __future__ import annotations

import enum
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .errors import InvariantError, ValidationError
from .ghz import COMBO_SIGNS, COMBOS, AXIS, DetectorTriplet, EpsilonReport, born_probabilities, correlation
from .hvm import AtomDistribution, Verdict, contradiction_verdict, max_min_correlation, model_report
from .mkc import (
    AXIS_RATIONAL,
    DEFAULT_BOUND,
    RationalDirection,
    TripletSet,
    as_detector_triplet,
    correlated_triplet_set,
    rationals_within,
    triplet_capacity,
)


class Model(str, enum.Enum):
    QUANTUM = "quantum"
    PRODUCT_HV = "product-hv"
    CORRELATED_HV = "correlated-hv"


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    rounds: int
    delta: float
    seed: int
    denominator_bound: int = DEFAULT_BOUND
    triplet_count: int = 16  # size of the correlated set, capped by what the bound offers

    def __post_init__(self):
        try:
            object.__setattr__(self, "model", Model(self.model))
        except ValueError as exc:
            raise ValidationError(f"unknown model {self.model!r}") from exc
        if isinstance(self.rounds, bool) or int(self.rounds) != self.rounds or self.rounds < 1:
            raise ValidationError(f"rounds must be a positive integer, got {self.rounds!r}")
        if not (math.isfinite(self.delta) and 0 <= self.delta <= math.pi / 4):
            raise ValidationError(f"delta must lie in [0, pi/4], got {self.delta!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if int(self.denominator_bound) != self.denominator_bound or self.denominator_bound < 1:
            raise ValidationError("denominator_bound must be a positive integer")
        if int(self.triplet_count) != self.triplet_count or self.triplet_count < 4:
            raise ValidationError("triplet_count must be an integer >= 4")


@dataclass(frozen=True)
class RoundRecord:
    """One round. ``triplet`` holds the exact rational alignments used."""

    index: int
    combo: str
    triplet: tuple[RationalDirection, RationalDirection, RationalDirection]
    outcomes: tuple[int, int, int]
    product: int
    valuation: Optional[int] = None  # atom index, PRODUCT_HV only

    def __post_init__(self):
        if self.combo not in COMBOS:
            raise InvariantError(f"unknown combo {self.combo!r}")
        if any(s not in (1, -1) for s in self.outcomes):
            raise InvariantError(f"outcomes must be +-1, got {self.outcomes}")
        if self.product != self.outcomes[0] * self.outcomes[1] * self.outcomes[2]:
            raise InvariantError("product does not match the outcomes")

    def detector_triplet(self) -> DetectorTriplet:
        return as_detector_triplet(self.triplet)

    def as_dict(self) -> dict:
        out = {
            "round": self.index,
            "combo": self.combo,
            "triplet": [str(d) for d in self.triplet],
            "outcomes": list(self.outcomes),
            "product": self.product,
        }
        if self.valuation is not None:
            out["valuation"] = self.valuation
        return out


def _outcomes(pattern: int) -> tuple[int, int, int]:
    return tuple(1 - 2 * ((pattern >> (2 - r)) & 1) for r in range(3))


class RoundLog(Sequence):
    """Lazy sequence of RoundRecords backed by the sampled arrays."""

    def __init__(self, combo: np.ndarray, triplets: np.ndarray, pattern: np.ndarray,
                 directions: Sequence[RationalDirection], valuation: Optional[np.ndarray] = None):
        self._combo = combo
        self._triplets = triplets  # (rounds, 3) indices into ``directions``
        self._pattern = pattern
        self._directions = tuple(directions)
        self._valuation = valuation

    def __len__(self) -> int:
        return len(self._combo)

    def _record(self, i: int) -> RoundRecord:
        outcomes = _outcomes(int(self._pattern[i]))
        return RoundRecord(
            index=i,
            combo=COMBOS[int(self._combo[i])],
            triplet=tuple(self._directions[k] for k in self._triplets[i]),
            outcomes=outcomes,
            product=outcomes[0] * outcomes[1] * outcomes[2],
            valuation=None if self._valuation is None else int(self._valuation[i]),
        )

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._record(k) for k in range(*i.indices(len(self)))]
        n = len(self)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError("round index out of range")
        return self._record(i)

    def __iter__(self) -> Iterator[RoundRecord]:
        for i in range(len(self)):
            yield self._record(i)

    @property
    def products(self) -> np.ndarray:
        return _PARITY_SIGN[self._pattern]

    def write_ndjson(self, fp) -> int:
        for rec in self:
            fp.write(json.dumps(rec.as_dict()) + "\n")
        return len(self)


# sign product for each 3-bit outcome pattern
_PARITY_SIGN = np.array([1 - 2 * (bin(p).count("1") & 1) for p in range(8)], dtype=np.int64)


@dataclass(frozen=True)
class ComboTally:
    """Rounds and summed products for one combo; tallies add component-wise."""

    rounds: int
    product_sum: int

    def __add__(self, other: "ComboTally") -> "ComboTally":
        return ComboTally(self.rounds + other.rounds, self.product_sum + other.product_sum)

    @property
    def mean(self) -> Optional[float]:
        return self.product_sum / self.rounds if self.rounds else None

    @property
    def stderr(self) -> Optional[float]:
        if self.rounds < 2:
            return None
        m = self.product_sum / self.rounds
        return math.sqrt(max(0.0, 1.0 - m * m) / (self.rounds - 1))


@dataclass(frozen=True)
class ExperimentSummary:
    config: ExperimentConfig
    tallies: tuple[ComboTally, ComboTally, ComboTally, ComboTally]
    expected: tuple[float, float, float, float]  # model prediction for each combo
    triplet_set_size: int
    epsilon: Optional[EpsilonReport] = field(default=None)
    verdict: Optional[Verdict] = field(default=None)

    def __post_init__(self):
        for t in self.tallies:
            if t.rounds and abs(t.product_sum) > t.rounds:
                raise InvariantError("empirical correlation outside [-1, 1]")

    @property
    def E(self) -> tuple[Optional[float], ...]:
        return tuple(t.mean for t in self.tallies)

    @property
    def stderr(self) -> tuple[Optional[float], ...]:
        return tuple(t.stderr for t in self.tallies)

    def as_dict(self) -> dict:
        cfg = self.config
        out = {
            "model": cfg.model.value,
            "rounds": cfg.rounds,
            "delta": cfg.delta,
            "seed": cfg.seed,
            "denominator_bound": cfg.denominator_bound,
            "triplet_set_size": self.triplet_set_size,
            "combos": {
                c: {"rounds": t.rounds, "E": t.mean, "stderr": t.stderr, "expected": e}
                for c, t, e in zip(COMBOS, self.tallies, self.expected)
            },
            "tolerance": 4.0 / math.sqrt(cfg.rounds),
        }
        if self.epsilon is not None:
            out["eps_components"] = list(self.epsilon.components)
            out["eps"] = self.epsilon.eps
        if self.verdict is not None:
            out["verdict"] = self.verdict.kind.value
            out["threshold"] = self.verdict.threshold
            out["slack"] = self.verdict.slack
        return out


def _axis_triplet_set() -> TripletSet:
    triplets = [tuple(AXIS_RATIONAL[j] for j in combo) for combo in COMBOS]
    return TripletSet.explicit(triplets, COMBOS)


def _contextual_set(cfg: ExperimentConfig) -> TripletSet:
    if cfg.delta == 0:
        return _axis_triplet_set()
    count = min(cfg.triplet_count, triplet_capacity(cfg.delta, cfg.denominator_bound))
    return correlated_triplet_set(cfg.delta, count, cfg.seed, cfg.denominator_bound)


def _run_contextual(cfg: ExperimentConfig):
    tset = _contextual_set(cfg)
    order = sorted(range(len(tset.triplets)), key=lambda k: COMBOS.index(tset.combos[k]))
    members = [tset.triplets[k] for k in order]
    labels = [tset.combos[k] for k in order]
    counts = np.array([labels.count(c) for c in COMBOS], dtype=np.int64)
    if (counts == 0).any():
        raise InvariantError("triplet set misses a combo")
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    detector = [as_detector_triplet(t) for t in members]
    cdf = np.cumsum([born_probabilities(t) for t in detector], axis=1)
    corr = np.array([correlation(t) for t in detector])
    expected = tuple(float(corr[o:o + n].mean()) for o, n in zip(offsets, counts))

    combo, member, pattern = _kernels.sample_contextual(
        cfg.seed, cfg.rounds, offsets, counts, cdf, cfg.model is Model.CORRELATED_HV
    )
    directions = sorted({d for t in members for d in t})
    pos = {d: i for i, d in enumerate(directions)}
    member_dirs = np.array([[pos[d] for d in t] for t in members], dtype=np.int64)
    log = RoundLog(combo, member_dirs[member], pattern, directions)
    return log, expected, len(members)


def _run_product(cfg: ExperimentConfig, atoms: AtomDistribution):
    pools = {j: [d for d, _ in rationals_within(AXIS[j], cfg.delta, cfg.denominator_bound)] for j in "xy"}
    # the same lists for every detector; choice_counts[r][axis]
    choice_counts = np.array([[len(pools["x"]), len(pools["y"])]] * 3, dtype=np.int64)
    cdf = np.cumsum(atoms.weights)
    combo, choices, valuation, pattern = _kernels.sample_product(cfg.seed, cfg.rounds, choice_counts, cdf)
    seen = set(pools["x"])
    directions = pools["x"] + [d for d in pools["y"] if d not in seen]
    pos = {d: i for i, d in enumerate(directions)}
    index = {j: np.array([pos[d] for d in pools[j]], dtype=np.int64) for j in "xy"}
    axes = _kernels.COMBO_AXES[combo]
    triplets = np.where(axes == 0, index["x"][np.minimum(choices, len(pools["x"]) - 1)],
                        index["y"][np.minimum(choices, len(pools["y"]) - 1)])
    log = RoundLog(combo, triplets, pattern, directions, valuation)
    rep = model_report(atoms)
    expected = tuple(float(s * e) for s, e in zip(COMBO_SIGNS, rep.E))
    return log, expected, len(pools["x"]) ** 3


def summarize(cfg: ExperimentConfig, log: RoundLog, expected, set_size: int) -> ExperimentSummary:
    combo = log._combo.astype(np.int64)
    n = np.bincount(combo, minlength=4)
    sums = np.bincount(combo, weights=log.products, minlength=4)
    tallies = tuple(ComboTally(int(a), int(round(b))) for a, b in zip(n, sums))
    eps = verdict = None
    if all(t.rounds for t in tallies):
        eps = EpsilonReport.from_correlations([t.mean for t in tallies])
        verdict = contradiction_verdict(eps)
    return ExperimentSummary(cfg, tallies, tuple(expected), set_size, eps, verdict)


def run_experiment(cfg: ExperimentConfig, atoms: Optional[AtomDistribution] = None) -> tuple[ExperimentSummary, RoundLog]:
    """Run ``cfg.rounds`` rounds; returns the summary and the lazy round log.

    ``atoms`` only matters for PRODUCT_HV and defaults to the max-min witness.
    """
    if not isinstance(cfg, ExperimentConfig):
        raise ValidationError("run_experiment needs an ExperimentConfig")
    if cfg.model is Model.PRODUCT_HV:
        if atoms is None:
            atoms = max_min_correlation()[1]
        log, expected, size = _run_product(cfg, atoms)
    else:
        if atoms is not None:
            raise ValidationError("atoms only apply to the product-hv model")
        log, expected, size = _run_contextual(cfg)
    return summarize(cfg, log, expected, size), log
