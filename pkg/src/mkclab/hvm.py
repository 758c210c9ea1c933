"""Hidden-variable valuations for the six near-x / near-y spin observables.

Only the six values s_rj(lambda) enter the four products f_a, so any measure on
the hidden state space is represented exactly by its image on the 64 possible
valuations (``AtomDistribution``). Quantifying over all such distributions is
at least as strong as fixing a particular model's measure.

Valuations are indexed 0..63 in lexicographic order of
``(s1x, s1y, s2x, s2y, s3x, s3y)`` with +1 before -1, so index 0 is all +1.
"""
from __future__ import annotations

import enum
import functools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import constants as C
from .errors import InvariantError, ValidationError
from .ghz import EpsilonReport
from .lp import solve_lp

SLOTS = ("s1x", "s1y", "s2x", "s2y", "s3x", "s3y")


@dataclass(frozen=True)
class Valuation:
    s1x: int
    s1y: int
    s2x: int
    s2y: int
    s3x: int
    s3y: int

    def __post_init__(self):
        for name in SLOTS:
            if getattr(self, name) not in (1, -1):
                raise ValidationError(f"{name} must be +1 or -1")

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in SLOTS)

    @property
    def index(self) -> int:
        out = 0
        for s in self.signs:
            out = 2 * out + (s == -1)
        return out

    @classmethod
    def from_index(cls, i: int) -> "Valuation":
        if not 0 <= i < 64:
            raise ValidationError(f"valuation index {i} out of range")
        return cls(*(1 - 2 * ((i >> (5 - k)) & 1) for k in range(6)))

    def sign(self, r: int, axis: str) -> int:
        return getattr(self, f"s{r}{axis}")

    def flipped(self, *names: str) -> "Valuation":
        return Valuation(*(-getattr(self, n) if n in names else getattr(self, n) for n in SLOTS))


ALL_VALUATIONS = tuple(Valuation.from_index(i) for i in range(64))
ALL_PLUS = ALL_VALUATIONS[0]


@dataclass(frozen=True)
class FVector:
    f0: int
    f1: int
    f2: int
    f3: int

    def __post_init__(self):
        if self.f0 * self.f1 * self.f2 * self.f3 != -1:
            raise InvariantError(f"parity identity violated by {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.f0, self.f1, self.f2, self.f3)


def f_values(v: Valuation) -> FVector:
    return FVector(
        -v.s1x * v.s2x * v.s3x,
        v.s1x * v.s2y * v.s3y,
        v.s1y * v.s2x * v.s3y,
        v.s1y * v.s2y * v.s3x,
    )


# F[a, i] = f_a of valuation i
F_TABLE = np.array([f_values(v).as_tuple() for v in ALL_VALUATIONS], dtype=np.int64).T
F_TABLE.setflags(write=False)


@dataclass(frozen=True)
class ParityReport:
    checked: int
    pattern_counts: dict[tuple[int, int, int, int], int]
    plus_one_counts: dict[int, int]  # number of f_a = +1 -> number of valuations

    @property
    def all_plus_count(self) -> int:
        return self.plus_one_counts.get(4, 0)


def parity_exhaustive() -> ParityReport:
    """Check f0 f1 f2 f3 = -1 on all 64 valuations and tabulate the f patterns."""
    patterns: Counter = Counter()
    for v in ALL_VALUATIONS:
        f = (-v.s1x * v.s2x * v.s3x, v.s1x * v.s2y * v.s3y, v.s1y * v.s2x * v.s3y, v.s1y * v.s2y * v.s3x)
        if f[0] * f[1] * f[2] * f[3] != -1:
            raise InvariantError(f"parity identity fails at {v}")
        patterns[f] += 1
    plus: Counter = Counter()
    for f, n in patterns.items():
        plus[sum(x == 1 for x in f)] += n
    checked = sum(patterns.values())
    if checked != 64 or len(patterns) != 8 or set(patterns.values()) != {8}:
        raise InvariantError("unexpected f-pattern structure")
    return ParityReport(checked, dict(sorted(patterns.items(), reverse=True)), dict(sorted(plus.items())))


class AtomDistribution:
    """Probability weights on the 64 valuations.

    ``exact`` holds the weights as Fractions when they are known exactly (for
    instance LP witnesses); downstream reports then use exact arithmetic.
    """

    __slots__ = ("weights", "exact")

    def __init__(self, weights, exact: Optional[Sequence[Fraction]] = None):
        w = np.array(weights, dtype=np.float64).reshape(-1)
        if w.size != 64:
            raise ValidationError(f"need 64 weights, got {w.size}")
        if not np.all(np.isfinite(w)) or (w < 0).any():
            raise ValidationError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > C.DISTRIBUTION_SUM_TOL:
            raise ValidationError(f"weights sum to {w.sum()!r}, not 1")
        if exact is not None:
            exact = tuple(Fraction(x) for x in exact)
            if len(exact) != 64 or sum(exact) != 1 or min(exact) < 0:
                raise ValidationError("exact weights must be 64 non-negative fractions summing to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, name, value):
        raise AttributeError("AtomDistribution is immutable")

    @classmethod
    def from_fractions(cls, fracs: Sequence[Fraction]) -> "AtomDistribution":
        return cls([float(f) for f in fracs], exact=fracs)

    @classmethod
    def point_mass(cls, v: Valuation) -> "AtomDistribution":
        fr = [Fraction(0)] * 64
        fr[v.index] = Fraction(1)
        return cls.from_fractions(fr)

    @classmethod
    def uniform(cls) -> "AtomDistribution":
        return cls.from_fractions([Fraction(1, 64)] * 64)

    @classmethod
    def mixture(cls, valuations: Iterable[Valuation]) -> "AtomDistribution":
        """Equal-weight mixture (repeats add weight)."""
        vs = list(valuations)
        fr = [Fraction(0)] * 64
        for v in vs:
            fr[v.index] += Fraction(1, len(vs))
        return cls.from_fractions(fr)

    def support(self) -> dict[int, float]:
        return {i: float(w) for i, w in enumerate(self.weights) if w > 0}

    def __repr__(self):
        return f"AtomDistribution(support={self.support()})"


@dataclass(frozen=True)
class ModelReport:
    """Integrals E_a of f_a, the measures mu(A_a) and mu(A0 & A1 & A2 & A3).

    Values are Fractions when the distribution carries exact weights.
    """

    E: tuple
    muA: tuple
    mu_intersection: object

    def __post_init__(self):
        for e, m in zip(self.E, self.muA):
            if abs(e - (2 * m - 1)) > C.DISTRIBUTION_SUM_TOL:
                raise InvariantError("E_a != 2 mu(A_a) - 1")


def model_report(mu: AtomDistribution) -> ModelReport:
    if not isinstance(mu, AtomDistribution):
        raise ValidationError("model_report needs an AtomDistribution")
    w = mu.exact if mu.exact is not None else [float(x) for x in mu.weights]
    zero = Fraction(0) if mu.exact is not None else 0.0
    E, muA = [], []
    for a in range(4):
        row = F_TABLE[a]
        E.append(sum((wi * int(f) for wi, f in zip(w, row)), zero))
        muA.append(sum((wi for wi, f in zip(w, row) if f == 1), zero))
    inter = sum((wi for i, wi in enumerate(w) if (F_TABLE[:, i] == 1).all()), zero)
    return ModelReport(tuple(E), tuple(muA), inter)


@functools.lru_cache(maxsize=1)
def max_min_correlation() -> tuple[Fraction, AtomDistribution]:
    """max over distributions of min_a E_a, solved as an exact LP over 64 atoms.

    Variables are the 64 weights and t = t_plus - t_minus; the witness is the
    basic optimal solution reached by Bland's rule with columns in valuation
    order.
    """
    n = 64
    c = [0] * n + [1, -1]
    A_ub = [[-int(f) for f in F_TABLE[a]] + [1, -1] for a in range(4)]
    b_ub = [0] * 4
    A_eq = [[1] * n + [0, 0]]
    res = solve_lp(c, A_ub, b_ub, A_eq, [1])
    if res.status != "optimal":
        raise InvariantError(f"max-min LP returned {res.status}")
    witness = AtomDistribution.from_fractions(res.x[:n])
    return res.value, witness


def product_model_gap() -> float:
    """The smallest eps any product-form model can reach: 1 - max min E_a."""
    value, _ = max_min_correlation()
    return float(1 - value)


class VerdictKind(str, enum.Enum):
    IMPOSSIBLE = "IMPOSSIBLE-FOR-PRODUCT-MODELS"
    UNDECIDED = "UNDECIDED-BY-THIS-TEST"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    eps: float
    threshold: float
    slack: float

    @property
    def fires(self) -> bool:
        return self.kind is VerdictKind.IMPOSSIBLE


def contradiction_verdict(report: EpsilonReport) -> Verdict:
    """IMPOSSIBLE-FOR-PRODUCT-MODELS when eps is below the product-model gap."""
    threshold = product_model_gap()
    eps = float(report.eps)
    kind = VerdictKind.IMPOSSIBLE if eps < threshold else VerdictKind.UNDECIDED
    return Verdict(kind, eps, threshold, threshold - eps)


@dataclass(frozen=True)
class DemandFeasibility:
    """Can any distribution satisfy E_a >= 1 - eps for all four a?

    When not, ``certificate = (y, z)`` satisfies sum_a y_a f_a(v) + z <= 0 on
    every valuation v while sum_a y_a (1 - eps) + z > 0, which rules out every
    distribution at once.
    """

    eps: Fraction
    feasible: bool
    example: Optional[AtomDistribution] = None
    certificate: Optional[tuple[tuple[Fraction, ...], Fraction]] = None


def as_fraction(x) -> Fraction:
    """Exact value for ints/Fractions; floats go through their shortest repr."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return Fraction(repr(float(x)))


def _pattern_rows() -> list[tuple[int, int, int, int]]:
    return sorted({tuple(int(x) for x in F_TABLE[:, i]) for i in range(64)}, reverse=True)


def demand_feasibility(eps) -> DemandFeasibility:
    eps = as_fraction(eps)
    lower = 1 - eps
    primal = solve_lp(
        [0] * 64,
        [[-int(f) for f in F_TABLE[a]] for a in range(4)],
        [-lower] * 4,
        [[1] * 64],
        [1],
    )
    if primal.status == "optimal":
        return DemandFeasibility(eps, True, example=AtomDistribution.from_fractions(primal.x))
    # Farkas multipliers over the 8 achievable f patterns; y normalized, z bounded
    pats = _pattern_rows()
    c = [lower] * 4 + [1, -1]
    A_ub = [list(p) + [1, -1] for p in pats]
    b_ub = [0] * len(pats)
    A_ub += [[1, 1, 1, 1, 0, 0], [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]]
    b_ub += [1, 4, 4]
    dual = solve_lp(c, A_ub, b_ub)
    if dual.status != "optimal" or dual.value <= 0:
        raise InvariantError("primal infeasible but no Farkas certificate found")
    y, z = dual.x[:4], dual.x[4] - dual.x[5]
    for i in range(64):
        if sum(ya * int(f) for ya, f in zip(y, F_TABLE[:, i])) + z > 0:
            raise InvariantError("Farkas certificate fails on an atom")
    if sum(ya * lower for ya in y) + z <= 0:
        raise InvariantError("Farkas certificate is not strict")
    return DemandFeasibility(eps, False, certificate=(tuple(y), z))


class BoundStatus(str, enum.Enum):
    HOLDS = "HOLDS"
    NOT_APPLICABLE = "NOT-APPLICABLE"
    VIOLATED = "VIOLATED"


@dataclass(frozen=True)
class MeasureBoundEvidence:
    """The chain E_a >= 1-eps  =>  mu(A_a) >= 1-eps/2  =>  mu(cap A_a) >= 1-2eps.

    ``status`` is NOT-APPLICABLE when ``mu`` does not meet the premise (the
    implication then holds vacuously). ``intersection_actual`` is always 0 by
    the parity identity, which is what makes the chain contradictory for
    eps < 1/2.
    """

    eps: object
    status: BoundStatus
    E: tuple
    muA: tuple
    muA_bound: object
    intersection_bound: object
    intersection_actual: object
    demand: DemandFeasibility = field(repr=False)

    def __bool__(self) -> bool:
        return self.status is not BoundStatus.VIOLATED


def measure_bound_check(mu: AtomDistribution, eps) -> MeasureBoundEvidence:
    if not (0 <= eps <= 2):
        raise ValidationError(f"eps must lie in [0, 2], got {eps!r}")
    rep = model_report(mu)
    e = as_fraction(eps) if mu.exact is not None else float(eps)
    premise = all(E >= 1 - e for E in rep.E)
    bound = 1 - e / 2
    if not premise:
        status = BoundStatus.NOT_APPLICABLE
    elif all(m >= bound for m in rep.muA):
        status = BoundStatus.HOLDS
    else:
        status = BoundStatus.VIOLATED
    return MeasureBoundEvidence(
        eps=e,
        status=status,
        E=rep.E,
        muA=rep.muA,
        muA_bound=bound,
        intersection_bound=1 - 2 * e,
        intersection_actual=rep.mu_intersection,
        demand=demand_feasibility(eps),
    )


def single_flip_mixture() -> AtomDistribution:
    """Equal mixture of all +1 and the three single flips of s1x, s2x, s3x."""
    return AtomDistribution.mixture(
        [ALL_PLUS.flipped("s1x"), ALL_PLUS.flipped("s2x"), ALL_PLUS.flipped("s3x"), ALL_PLUS]
    )
