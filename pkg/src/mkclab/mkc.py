"""Structures specific to MKC-type models.

* Exact rational directions on the unit sphere: primitive integer solutions of
  p1^2 + p2^2 + p3^2 = q^2. Truncating at a maximum denominator gives a finite
  slice of a countable dense set of available detector alignments.
* Triplet sets, either product-form (independent per-detector lists) or an
  explicit list, and a test for Cartesian-product structure.
* Non-local commuting triplets: the local observables sigma_j^(r) conjugated
  by one entangling unitary exp(i eta K). Conjugation keeps commuting
  operators commuting and preserves the spectrum, while the result is within
  O(eta) of the local observables.

Note that small-denominator rational points are isolated: any other rational
direction with denominator <= N sits at least about sqrt(2/N) radians from a
coordinate axis. Sets built "within delta of e_x" at modest bounds therefore
often contain only the axis itself.
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from . import constants as C
from .errors import InvariantError, ValidationError
from .ghz import COMBOS, AXIS, DetectorTriplet, Direction, EpsilonReport, ghz_state, local_operator
from .linalg import (
    SIGMA_X,
    SIGMA_Y,
    OperatorMatrix,
    adjoint,
    commutator_norm,
    eigh,
    expectation,
    hermiticity_defect,
    identity,
    operator_norm,
    unitary_exp,
)

DEFAULT_BOUND = 100


@dataclass(frozen=True, order=True)
class RationalDirection:
    """The unit vector (p1, p2, p3) / q with exact integer coordinates."""

    p1: int
    p2: int
    p3: int
    q: int

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer")
            object.__setattr__(self, name, int(v))
        if self.q <= 0:
            raise ValidationError("q must be positive")
        if self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3 != self.q * self.q:
            raise ValidationError(f"{self.as_tuple()} is not on the unit sphere")
        if math.gcd(math.gcd(self.p1, self.p2), math.gcd(self.p3, self.q)) != 1:
            raise ValidationError(f"{self.as_tuple()} is not primitive")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.p1, self.p2, self.p3, self.q)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3], dtype=np.float64) / self.q

    def direction(self) -> Direction:
        return Direction.from_vector((self.p1, self.p2, self.p3))

    def __str__(self) -> str:
        return f"{self.p1}/{self.q},{self.p2}/{self.q},{self.p3}/{self.q}"

    @classmethod
    def parse(cls, text: str) -> "RationalDirection":
        """Inverse of ``str``: ``"p1/q,p2/q,p3/q"`` with a common denominator."""
        try:
            parts = [tuple(int(x) for x in c.split("/")) for c in text.split(",")]
        except ValueError as exc:
            raise ValidationError(f"cannot parse rational direction {text!r}") from exc
        if len(parts) != 3 or any(len(p) != 2 for p in parts) or len({p[1] for p in parts}) != 1:
            raise ValidationError(f"expected 'p1/q,p2/q,p3/q', got {text!r}")
        return cls(parts[0][0], parts[1][0], parts[2][0], parts[0][1])


AXIS_RATIONAL = {"x": RationalDirection(1, 0, 0, 1), "y": RationalDirection(0, 1, 0, 1)}


@functools.lru_cache(maxsize=8)
def _table(bound: int) -> tuple[np.ndarray, np.ndarray]:
    ints = _kernels.pythagorean_quadruples(bound)
    ints.setflags(write=False)
    unit = ints[:, :3] / ints[:, 3:].astype(np.float64)
    unit.setflags(write=False)
    return ints, unit


def _check_bound(bound: int) -> None:
    if int(bound) != bound or bound < 1:
        raise ValidationError(f"bound must be a positive integer, got {bound!r}")


def rational_directions(bound: int) -> list[RationalDirection]:
    """All rational unit vectors with denominator <= bound, sorted by (q, p1, p2, p3)."""
    _check_bound(bound)
    ints, _ = _table(int(bound))
    return [RationalDirection(*map(int, row)) for row in ints]


def _angles(unit: np.ndarray, target: np.ndarray) -> np.ndarray:
    cross = np.linalg.norm(np.cross(unit, target), axis=1)
    return np.arctan2(cross, unit @ target)


def nearest_rational(target: Direction, bound: int) -> tuple[RationalDirection, float]:
    """Rational direction (denominator <= bound) closest in angle to ``target``.

    Ties go to the smaller denominator, then lexicographic (p1, p2, p3).
    """
    _check_bound(bound)
    ints, unit = _table(int(bound))
    ang = _angles(unit, target.vector)
    best = float(ang.min())
    i = int(np.flatnonzero(ang <= best + 1e-15)[0])
    return RationalDirection(*map(int, ints[i])), float(ang[i])


def rationals_within(axis: Direction, delta: float, bound: int) -> list[tuple[RationalDirection, float]]:
    """Rational directions within angle delta of ``axis``, nearest first."""
    _check_bound(bound)
    ints, unit = _table(int(bound))
    ang = _angles(unit, axis.vector)
    idx = np.flatnonzero(ang <= delta + 1e-15)
    idx = idx[np.argsort(ang[idx], kind="stable")]
    return [(RationalDirection(*map(int, ints[i])), float(ang[i])) for i in idx]


def smallest_nonzero_angle(axis: Direction, bound: int) -> float:
    _, unit = _table(int(bound))
    ang = _angles(unit, axis.vector)
    return float(ang[ang > 1e-12].min())


class TripletKind(str, enum.Enum):
    PRODUCT = "PRODUCT"
    EXPLICIT = "EXPLICIT"


@dataclass(frozen=True)
class TripletSet:
    """A finite set of allowed detector-alignment triplets.

    PRODUCT sets hold three per-detector lists and mean their Cartesian
    product; EXPLICIT sets list their members (optionally labelled with the
    target combo each one approximates). Elements can be any hashable
    direction type.
    """

    kind: TripletKind
    factors: Optional[tuple[tuple[Hashable, ...], ...]] = None
    triplets: Optional[tuple[tuple[Hashable, Hashable, Hashable], ...]] = None
    combos: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.kind is TripletKind.PRODUCT:
            if self.factors is None or len(self.factors) != 3 or not all(self.factors):
                raise ValidationError("a PRODUCT set needs three non-empty factors")
        else:
            if not self.triplets:
                raise ValidationError("an EXPLICIT set needs at least one triplet")
            if any(len(t) != 3 for t in self.triplets):
                raise ValidationError("every member must be a triplet")
            if self.combos is not None and len(self.combos) != len(self.triplets):
                raise ValidationError("combos must label every triplet")

    @classmethod
    def product(cls, f1: Iterable, f2: Iterable, f3: Iterable) -> "TripletSet":
        return cls(TripletKind.PRODUCT, factors=tuple(tuple(dict.fromkeys(f)) for f in (f1, f2, f3)))

    @classmethod
    def explicit(cls, triplets: Iterable[Sequence], combos: Optional[Sequence[str]] = None) -> "TripletSet":
        ts = [tuple(t) for t in triplets]
        if combos is None:
            return cls(TripletKind.EXPLICIT, triplets=tuple(dict.fromkeys(ts)))
        seen: dict = {}
        for t, c in zip(ts, combos):
            seen.setdefault(t, c)
        return cls(TripletKind.EXPLICIT, triplets=tuple(seen), combos=tuple(seen.values()))

    def members(self) -> tuple[tuple, ...]:
        if self.kind is TripletKind.PRODUCT:
            return tuple(itertools.product(*self.factors))
        return self.triplets

    def __len__(self) -> int:
        if self.kind is TripletKind.PRODUCT:
            return math.prod(len(f) for f in self.factors)
        return len(self.triplets)

    def as_explicit(self) -> "TripletSet":
        return TripletSet.explicit(self.members())

    def projections(self) -> tuple[tuple, tuple, tuple]:
        if self.kind is TripletKind.PRODUCT:
            return self.factors
        return tuple(tuple(dict.fromkeys(t[r] for t in self.triplets)) for r in range(3))


def is_cartesian_product(s: TripletSet) -> tuple[bool, Optional[tuple]]:
    """Whether ``s`` equals the product of its three coordinate projections.

    When it does not, the first product element (in projection order) missing
    from ``s`` is returned as the witness.
    """
    members = set(s.members())
    projections = s.projections()
    if len(members) == math.prod(len(p) for p in projections):
        return True, None
    for t in itertools.product(*projections):
        if t not in members:
            return False, t
    raise InvariantError("projection product smaller than the set itself")


def _rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    k = axis / np.linalg.norm(axis)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)


def _axis_pools(delta: float, bound: int) -> dict[str, list[tuple[RationalDirection, float]]]:
    return {j: rationals_within(AXIS[j], delta, bound) for j in "xy"}


def triplet_capacity(delta: float, bound: int) -> int:
    """Number of distinct rational triplets within delta of the four target combos."""
    _check_bound(bound)
    sizes = {j: len(pool) for j, pool in _axis_pools(delta, bound).items()}
    return sum(math.prod(sizes[j] for j in combo) for combo in COMBOS)


def correlated_triplet_set(delta: float, count: int, seed: int, bound: int = DEFAULT_BOUND) -> TripletSet:
    """Explicit, non-product set of ``count`` rational triplets near the four combos.

    Member k targets combo ``COMBOS[k % 4]``. One random rotation (angle below
    delta) moves all three target axes together and each detector then takes
    the rational direction, within delta of its axis, nearest the rotated
    axis. Detector settings are therefore drawn jointly, not per detector.

    Raises ValidationError when the denominator bound does not offer enough
    distinct rational triplets within delta.
    """
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta!r}")
    if int(count) != count or count < 2:
        raise ValidationError(f"count must be an integer >= 2, got {count!r}")
    _check_bound(bound)
    pools = _axis_pools(delta, bound)
    capacity = triplet_capacity(delta, bound)
    if capacity < count:
        nearest = min(smallest_nonzero_angle(AXIS[j], bound) for j in "xy")
        raise ValidationError(
            f"only {capacity} distinct rational triplets lie within delta={delta} at bound={bound}; "
            f"smallest non-zero angle to an axis is {nearest:.4g} rad"
        )
    unit = {j: np.array([d.vector for d, _ in pools[j]]) for j in "xy"}
    rng = np.random.default_rng(seed)
    members: dict[tuple, str] = {}
    attempts = 0
    while len(members) < count:
        attempts += 1
        if attempts > 200 * count:
            raise ValidationError(
                f"could not draw {count} distinct triplets within delta={delta} at bound={bound}"
            )
        combo = COMBOS[len(members) % 4]
        rot = _rotation(rng.normal(size=3), rng.uniform(0.0, delta))
        triplet = []
        for j in combo:
            v = rot @ AXIS[j].vector
            triplet.append(pools[j][int(np.argmax(unit[j] @ v))][0])
        members.setdefault(tuple(triplet), combo)
    out = TripletSet.explicit(members.keys(), list(members.values()))
    if is_cartesian_product(out)[0]:
        raise InvariantError("correlated triplet set came out as a Cartesian product")
    return out


def as_detector_triplet(t: Sequence[RationalDirection]) -> DetectorTriplet:
    return DetectorTriplet(*(d.direction() for d in t))


# ---------------------------------------------------------------------------
# non-local commuting triplets

LOCAL_PAULI = {"x": SIGMA_X, "y": SIGMA_Y}


def local_sigma(r: int, axis: str) -> OperatorMatrix:
    return local_operator(LOCAL_PAULI[axis], r)


def random_hermitian(rng: np.random.Generator, dim: int = 8) -> OperatorMatrix:
    """Gaussian Hermitian matrix scaled to unit max-entry norm."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    k = (a + a.conj().T) / 2
    return OperatorMatrix(k / np.abs(k).max())


@dataclass(frozen=True)
class PerturbedObservables:
    """The six operators U sigma_j^(r) U^dagger for one U = exp(i eta K)."""

    eta: float
    seed: int
    generator: OperatorMatrix
    unitary: OperatorMatrix
    taus: dict  # (r, axis) -> OperatorMatrix
    distance_constant: float  # 2 ||K||, so ||tau - sigma|| <= distance_constant * eta

    def triplet_ops(self, combo: str) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
        return tuple(self.taus[(r + 1, j)] for r, j in enumerate(combo))


def _check_eta(eta: float) -> None:
    if not (0 < eta <= 0.5):
        raise ValidationError(f"eta must lie in (0, 0.5], got {eta!r}")


@functools.lru_cache(maxsize=64)
def perturbed_observables(eta: float, seed: int) -> PerturbedObservables:
    _check_eta(eta)
    k = random_hermitian(np.random.default_rng(seed))
    u = unitary_exp(k, eta)
    ud = adjoint(u)
    taus = {(r, j): u @ local_sigma(r, j) @ ud for r in (1, 2, 3) for j in "xy"}
    return PerturbedObservables(eta, seed, k, u, taus, 2.0 * operator_norm(k))


@dataclass(frozen=True)
class CommutingTriplet:
    """Three pairwise-commuting Hermitian involutions on the 8-dim space."""

    tau1: OperatorMatrix
    tau2: OperatorMatrix
    tau3: OperatorMatrix
    combo: str
    eta: float
    seed: int
    distance_constant: float
    distances: tuple[float, float, float]

    def __post_init__(self):
        ops = self.operators
        eye = identity(8).entries
        for t in ops:
            if hermiticity_defect(t) > C.COMMUTATOR_TOL:
                raise InvariantError("tau is not Hermitian")
            if np.abs(t.entries @ t.entries - eye).max() > C.INVOLUTION_TOL:
                raise InvariantError("tau does not square to the identity")
        if self.max_commutator_norm() > C.COMMUTATOR_TOL:
            raise InvariantError("tau operators do not commute")

    @property
    def operators(self) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
        return (self.tau1, self.tau2, self.tau3)

    def max_commutator_norm(self) -> float:
        a, b, c = self.operators
        return max(commutator_norm(a, b), commutator_norm(a, c), commutator_norm(b, c))

    def spectra(self) -> list[np.ndarray]:
        return [eigh(t)[0] for t in self.operators]


def perturbed_commuting_triplet(combo: str, eta: float, seed: int) -> CommutingTriplet:
    """tau^(r) = U sigma_{j_r}^(r) U^dagger with U = exp(i eta K), K seeded random Hermitian."""
    if combo not in COMBOS:
        raise ValidationError(f"unknown combo {combo!r}")
    obs = perturbed_observables(eta, seed)
    taus = obs.triplet_ops(combo)
    dist = tuple(operator_norm(t - local_sigma(r + 1, j)) for t, (r, j) in zip(taus, enumerate(combo)))
    return CommutingTriplet(*taus, combo, eta, seed, obs.distance_constant, dist)


def nonlocal_epsilon_report(
    tx1: OperatorMatrix,
    ty1: OperatorMatrix,
    tx2: OperatorMatrix,
    ty2: OperatorMatrix,
    tx3: OperatorMatrix,
    ty3: OperatorMatrix,
) -> EpsilonReport:
    """eps from the four expectations <psi|tau tau tau|psi>, minus sign on xxx."""
    ops = {(1, "x"): tx1, (1, "y"): ty1, (2, "x"): tx2, (2, "y"): ty2, (3, "x"): tx3, (3, "y"): ty3}
    psi = ghz_state()
    corr = []
    for combo in COMBOS:
        a, b, c = (ops[(r + 1, j)] for r, j in enumerate(combo))
        worst = max(commutator_norm(a, b), commutator_norm(a, c), commutator_norm(b, c))
        if worst > C.COMMUTATOR_TOL:
            raise ValidationError(f"operators for combo {combo} do not commute ({worst:.3g})")
        corr.append(expectation(psi, a @ b @ c))
    return EpsilonReport.from_correlations(corr)
