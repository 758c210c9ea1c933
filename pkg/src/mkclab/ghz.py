"""Three-qubit GHZ system: state, spin observables, joint projections, correlations.

Basis ordering is ``|s1, s2, s3>`` in the sigma_z product basis with ``s = +1``
before ``s = -1`` and particle 1 the slowest index, i.e. the basis index is
``4*b1 + 2*b2 + b3`` where ``b_r = 0`` for ``s_r = +1`` and ``1`` for ``-1``.

The four measurement combinations are labelled ``xxx, xyy, yxy, yyx``. On the
GHZ state the first has product -1 and the other three +1, which is why
``EpsilonReport`` measures the first against -1 and the rest against +1.

Misalignment sampling in ``epsilon_sweep`` is a modelling choice: each
direction is rotated by exactly ``delta`` towards a uniformly random tangent
direction, and four axial worst-case patterns are always included.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import constants as C
from .errors import InvariantError, ValidationError
from .linalg import (
    I2,
    OperatorMatrix,
    StateVector,
    expectation,
    pauli_dot,
    tensor_all,
)

COMBOS = ("xxx", "xyy", "yxy", "yyx")
COMBO_SIGNS = (-1, 1, 1, 1)
SIGN_PATTERNS = tuple(itertools.product((1, -1), repeat=3))


@dataclass(frozen=True)
class Direction:
    """Unit vector on S2 given by polar angle theta (from +z) and azimuth phi (from +x)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValidationError("direction angles must be finite")

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_vector(cls, v) -> "Direction":
        x, y, z = (float(c) for c in v)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm == 0.0:
            raise ValidationError("zero vector has no direction")
        x, y, z = x / norm, y / norm, z / norm
        return cls(math.atan2(math.hypot(x, y), z), math.atan2(y, x))

    def angle_to(self, other: "Direction") -> float:
        a, b = self.vector, other.vector
        return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))


E_X = Direction(math.pi / 2, 0.0)
E_Y = Direction(math.pi / 2, math.pi / 2)
E_Z = Direction(0.0, 0.0)
AXIS = {"x": E_X, "y": E_Y}


@dataclass(frozen=True)
class DetectorTriplet:
    n1: Direction
    n2: Direction
    n3: Direction

    def __iter__(self) -> Iterator[Direction]:
        return iter((self.n1, self.n2, self.n3))


@dataclass(frozen=True)
class AlignmentSextet:
    """The six detector alignments n_rj (r = 1..3, j = x, y)."""

    n1x: Direction
    n1y: Direction
    n2x: Direction
    n2y: Direction
    n3x: Direction
    n3y: Direction

    def direction(self, r: int, axis: str) -> Direction:
        return getattr(self, f"n{r}{axis}")

    def triplet(self, combo: str) -> DetectorTriplet:
        if combo not in COMBOS:
            raise ValidationError(f"unknown combo {combo!r}")
        return DetectorTriplet(*(self.direction(r + 1, j) for r, j in enumerate(combo)))

    def as_dict(self) -> dict[str, Direction]:
        return {f"n{r}{j}": self.direction(r, j) for r in (1, 2, 3) for j in "xy"}


TARGET_SEXTET = AlignmentSextet(E_X, E_Y, E_X, E_Y, E_X, E_Y)


def target_triplet(combo: str) -> DetectorTriplet:
    return TARGET_SEXTET.triplet(combo)


@dataclass(frozen=True)
class EpsilonReport:
    """Deviations of the four combo correlations from their ideal values."""

    eps0: float
    eps1: float
    eps2: float
    eps3: float
    eps: float

    def __post_init__(self):
        vals = (self.eps0, self.eps1, self.eps2, self.eps3)
        for v in vals:
            if not (-C.CORRELATION_RANGE_TOL <= v <= 2 + C.CORRELATION_RANGE_TOL):
                raise InvariantError(f"epsilon component {v!r} outside [0, 2]")
        if self.eps != max(vals):
            raise InvariantError("eps must equal the largest component")

    @classmethod
    def from_correlations(cls, correlations: Sequence[float]) -> "EpsilonReport":
        """Build from the xxx, xyy, yxy, yyx expectation values."""
        eps = [min(max(1.0 - s * c, 0.0), 2.0) for s, c in zip(COMBO_SIGNS, correlations)]
        return cls(*eps, max(eps))

    @property
    def components(self) -> tuple[float, float, float, float]:
        return (self.eps0, self.eps1, self.eps2, self.eps3)


def ghz_state() -> StateVector:
    """(|1,1,1> - |-1,-1,-1>) / sqrt(2)."""
    return _GHZ


_GHZ = StateVector(np.array([1, 0, 0, 0, 0, 0, 0, -1]) / math.sqrt(2))


def _check_particle(r: int) -> None:
    if r not in (1, 2, 3):
        raise ValidationError(f"particle index must be 1, 2 or 3, got {r!r}")


def local_operator(op: OperatorMatrix, r: int) -> OperatorMatrix:
    """Embed a single-qubit operator on factor r of the three-qubit space."""
    _check_particle(r)
    return tensor_all(op if k == r else I2 for k in (1, 2, 3))


def spin_observable(n: Direction, r: int) -> OperatorMatrix:
    """n . sigma acting on particle r, identity on the others."""
    return local_operator(pauli_dot(n.vector), r)


def joint_projection(t: DetectorTriplet, signs: Sequence[int]) -> OperatorMatrix:
    """(1/8) prod_r (1 + s_r n_r . sigma^(r)), the joint spectral projection."""
    signs = tuple(signs)
    if len(signs) != 3 or any(s not in (1, -1) for s in signs):
        raise ValidationError(f"signs must be three values in {{+1, -1}}, got {signs!r}")
    factors = [(I2 + s * pauli_dot(n.vector)) * 0.5 for n, s in zip(t, signs)]
    return tensor_all(factors)


def born_probabilities(t: DetectorTriplet) -> np.ndarray:
    """Outcome probabilities on the GHZ state, ordered as ``SIGN_PATTERNS``.

    Values below ``BORN_ZERO_TOL`` are rounded to zero and the rest renormalized,
    so that exactly forbidden outcomes are never sampled.
    """
    psi = ghz_state()
    p = np.array([expectation(psi, joint_projection(t, s)) for s in SIGN_PATTERNS])
    if p.min() < -C.PROJECTION_TOL or abs(p.sum() - 1.0) > C.PROJECTION_TOL:
        raise InvariantError(f"Born probabilities invalid: {p}")
    p[p < C.BORN_ZERO_TOL] = 0.0
    return p / p.sum()


def correlation(t: DetectorTriplet) -> float:
    """<psi|(n1.sigma)(n2.sigma)(n3.sigma)|psi> by explicit 8x8 arithmetic."""
    op = spin_observable(t.n1, 1) @ spin_observable(t.n2, 2) @ spin_observable(t.n3, 3)
    value = expectation(ghz_state(), op)
    if abs(value) > 1 + C.CORRELATION_RANGE_TOL:
        raise InvariantError(f"correlation {value!r} outside [-1, 1]")
    return value


def correlation_closed_form(t: DetectorTriplet) -> float:
    """-sin(t1) sin(t2) sin(t3) cos(p1 + p2 + p3)."""
    s = math.sin(t.n1.theta) * math.sin(t.n2.theta) * math.sin(t.n3.theta)
    return -s * math.cos(t.n1.phi + t.n2.phi + t.n3.phi)


def epsilon_report(a: AlignmentSextet, closed_form: bool = False) -> EpsilonReport:
    corr = correlation_closed_form if closed_form else correlation
    return EpsilonReport.from_correlations([corr(a.triplet(c)) for c in COMBOS])


def _tangent_frame(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit azimuthal and polar tangent vectors at v (v off the z axis)."""
    theta = math.atan2(math.hypot(v[0], v[1]), v[2])
    phi = math.atan2(v[1], v[0])
    e_phi = np.array([-math.sin(phi), math.cos(phi), 0.0])
    e_theta = np.array([math.cos(theta) * math.cos(phi), math.cos(theta) * math.sin(phi), -math.sin(theta)])
    return e_phi, e_theta


def rotate_by(v: np.ndarray, tangent: np.ndarray, delta: float) -> np.ndarray:
    """Move unit vector v by angle delta along the great circle towards ``tangent``."""
    u = tangent - (tangent @ v) * v
    u = u / np.linalg.norm(u)
    return math.cos(delta) * v + math.sin(delta) * u


def perturb_direction(d: Direction, delta: float, rng: np.random.Generator) -> Direction:
    """Rotate d by exactly delta towards a uniformly random tangent direction."""
    v = d.vector
    return Direction.from_vector(rotate_by(v, rng.normal(size=3), delta))


def axial_patterns(delta: float) -> list[AlignmentSextet]:
    """Sextets with every direction moved by delta along +-azimuth or +-polar angle.

    All-azimuthal shifts of the same sign add up inside every combo and give
    the worst deviation 1 - cos(3 delta).
    """
    base = TARGET_SEXTET.as_dict()
    out = []
    for which in (0, 1):
        for sign in (1.0, -1.0):
            moved = {}
            for name, d in base.items():
                frame = _tangent_frame(d.vector)
                moved[name] = Direction.from_vector(rotate_by(d.vector, sign * frame[which], delta))
            out.append(AlignmentSextet(**moved))
    return out


_SEXTET_ORDER = ("n1x", "n1y", "n2x", "n2y", "n3x", "n3y")
# sextet slot used by detector r in each combo
_COMBO_SLOTS = np.array([[0, 2, 4], [0, 3, 5], [1, 2, 5], [1, 3, 4]])


def _batch_eps(vectors: np.ndarray) -> np.ndarray:
    """eps for a batch of sextets given as unit vectors of shape (S, 6, 3)."""
    z = vectors[..., 0] + 1j * vectors[..., 1]
    corr = -np.real(z[:, _COMBO_SLOTS].prod(axis=2))
    signs = np.array(COMBO_SIGNS)
    return (1.0 - signs * corr).max(axis=1)


def worst_epsilon(delta: float, rng: np.random.Generator, samples: int = 512) -> float:
    """Largest eps over random exact-delta misalignments plus the axial patterns."""
    if delta < 0:
        raise ValidationError("delta must be non-negative")
    if delta == 0:
        return epsilon_report(TARGET_SEXTET).eps
    base = np.array([TARGET_SEXTET.as_dict()[k].vector for k in _SEXTET_ORDER])
    g = rng.normal(size=(samples, 6, 3))
    g -= (g * base).sum(axis=2, keepdims=True) * base
    g /= np.linalg.norm(g, axis=2, keepdims=True)
    vecs = math.cos(delta) * base + math.sin(delta) * g
    worst = float(_batch_eps(vecs).max()) if samples else 0.0
    for sextet in axial_patterns(delta):
        worst = max(worst, epsilon_report(sextet).eps)
    return worst


def epsilon_sweep(delta_max: float, steps: int, seed: int, samples: int = 512) -> list[tuple[float, float]]:
    """worst eps on the grid delta_k = delta_max * k / steps, k = 0..steps.

    Each grid point gets its own child generator spawned from ``seed``, so the
    value at a grid point does not depend on evaluation order.
    """
    if not (0 < delta_max <= math.pi / 4):
        raise ValidationError(f"delta_max must lie in (0, pi/4], got {delta_max!r}")
    if int(steps) != steps or steps < 1:
        raise ValidationError(f"steps must be a positive integer, got {steps!r}")
    if samples < 0:
        raise ValidationError("samples must be non-negative")
    children = np.random.SeedSequence(seed).spawn(steps + 1)
    out = []
    for k, child in enumerate(children):
        delta = delta_max * k / steps
        out.append((delta, worst_epsilon(delta, np.random.default_rng(child), samples)))
    return out
