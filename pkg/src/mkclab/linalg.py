"""Small dense complex linear algebra on 2-, 4- and 8-dimensional spaces.

Operators and states are immutable wrappers around read-only numpy arrays.
Tensor products follow the Kronecker convention: entry ``(i, j)`` of ``a`` and
``(k, l)`` of ``b`` land at ``(i * dim_b + k, j * dim_b + l)`` of
``tensor(a, b)``, so the left factor is the slowest-varying index.

Hermitian eigenproblems are solved with a cyclic complex Jacobi iteration
rather than LAPACK; at these sizes it costs nothing and keeps the
eigensystem fully under our control.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from . import _kernels
from . import constants as C
from .errors import InvariantError, ValidationError

_SUPPORTED_DIMS = tuple(2**k for k in range(1, int(math.log2(C.MAX_DIM)) + 1))


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=np.complex128, copy=True)
    x.setflags(write=False)
    return x


def _check_dim(dim: int, what: str) -> None:
    if dim not in _SUPPORTED_DIMS:
        raise ValidationError(f"{what} dimension {dim} not in supported sizes {_SUPPORTED_DIMS}")


class OperatorMatrix:
    """Square complex matrix of dimension 2, 4 or 8."""

    __slots__ = ("_m",)

    def __init__(self, entries):
        m = np.asarray(entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        _check_dim(m.shape[0], "operator")
        if not np.all(np.isfinite(m)):
            raise ValidationError("operator has non-finite entries")
        object.__setattr__(self, "_m", _frozen(m))

    @classmethod
    def _wrap(cls, m: np.ndarray) -> "OperatorMatrix":
        # results of operations on validated operands skip re-validation
        obj = object.__new__(cls)
        m = np.ascontiguousarray(m, dtype=np.complex128)
        if m.flags.writeable:
            m.setflags(write=False)
        object.__setattr__(obj, "_m", m)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("OperatorMatrix is immutable")

    @property
    def entries(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _same_dims(self, other)
            return OperatorMatrix._wrap(self._m @ other._m)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            _same_dims(self, other)
            return OperatorMatrix._wrap(self._m + other._m)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            _same_dims(self, other)
            return OperatorMatrix._wrap(self._m - other._m)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return OperatorMatrix._wrap(self._m * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix._wrap(-self._m)

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._m, other._m))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"OperatorMatrix(dim={self.dim})"


class StateVector:
    """Unit-norm complex vector of dimension 2, 4 or 8."""

    __slots__ = ("_v",)

    def __init__(self, amplitudes, normalize: bool = False):
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        _check_dim(v.size, "state")
        if not np.all(np.isfinite(v)):
            raise ValidationError("state has non-finite amplitudes")
        norm = float(np.linalg.norm(v))
        if normalize:
            if norm == 0.0:
                raise ValidationError("cannot normalize the zero vector")
            v = v / norm
        elif abs(norm - 1.0) > C.STATE_NORM_TOL:
            raise ValidationError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "_v", _frozen(v))

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @property
    def amplitudes(self) -> np.ndarray:
        return self._v

    @property
    def dim(self) -> int:
        return self._v.size

    def norm(self) -> float:
        return float(np.linalg.norm(self._v))

    def __repr__(self):
        return f"StateVector(dim={self.dim})"


def _same_dims(a: OperatorMatrix, b: OperatorMatrix) -> None:
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")


def identity(dim: int) -> OperatorMatrix:
    return OperatorMatrix(np.eye(dim))


I2 = identity(2)
SIGMA_X = OperatorMatrix([[0, 1], [1, 0]])
SIGMA_Y = OperatorMatrix([[0, -1j], [1j, 0]])
SIGMA_Z = OperatorMatrix([[1, 0], [0, -1]])


def pauli_dot(n) -> OperatorMatrix:
    """The 2x2 operator n . sigma for a real 3-vector n."""
    x, y, z = (float(c) for c in n)
    return OperatorMatrix([[z, x - 1j * y], [x + 1j * y, -z]])


def tensor(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product; raises ValidationError beyond the supported size."""
    if a.dim * b.dim > C.MAX_DIM:
        raise ValidationError(f"tensor product dimension {a.dim * b.dim} exceeds {C.MAX_DIM}")
    x, y = a.entries, b.entries
    n = a.dim * b.dim
    return OperatorMatrix._wrap((x[:, None, :, None] * y[None, :, None, :]).reshape(n, n))


def tensor_all(ops: Iterable[OperatorMatrix]) -> OperatorMatrix:
    ops = list(ops)
    out = ops[0]
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def adjoint(a: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix._wrap(a.entries.conj().T.copy())


def max_entry_norm(a: OperatorMatrix) -> float:
    return float(np.abs(a.entries).max())


def hermiticity_defect(a: OperatorMatrix) -> float:
    return float(np.abs(a.entries - a.entries.conj().T).max())


def _require_hermitian(a: OperatorMatrix) -> None:
    d = hermiticity_defect(a)
    if d > C.HERMITIAN_TOL:
        raise ValidationError(f"operator is not Hermitian (defect {d:.3g})")


def _jacobi(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = _kernels.jacobi_hermitian(m, C.JACOBI_OFFDIAG_TOL, C.JACOBI_MAX_SWEEPS)
    if w is None:
        raise InvariantError("Jacobi iteration did not converge")
    n = w.size
    # fix the phase freedom: largest component real and positive
    for k in range(n):
        col = v[:, k]
        i = int(np.argmax(np.abs(col) - 1e-12 * np.arange(n)))
        v[:, k] = col * (abs(col[i]) / col[i])
    return w, v


def eigh(a: OperatorMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and the matching eigenvectors as matrix columns."""
    _require_hermitian(a)
    return _jacobi(a.entries)


def hermitian_eigensystem(a: OperatorMatrix) -> list[tuple[float, StateVector]]:
    """Full orthonormal eigensystem of a Hermitian operator, eigenvalues ascending.

    Raises ValidationError for non-Hermitian input and InvariantError if the
    reconstruction sum(l_i v_i v_i^H) misses ``a`` by more than the tolerance.
    """
    w, v = eigh(a)
    recon = (v * w) @ v.conj().T
    err = float(np.abs(recon - a.entries).max())
    if err > C.RECONSTRUCTION_TOL:
        raise InvariantError(f"eigensystem reconstruction error {err:.3g}")
    return [(float(w[k]), StateVector(v[:, k], normalize=True)) for k in range(len(w))]


def apply(a: OperatorMatrix, psi: StateVector) -> np.ndarray:
    """a|psi> as a raw (not necessarily normalized) amplitude array."""
    if a.dim != psi.dim:
        raise ValidationError(f"dimension mismatch: operator {a.dim}, state {psi.dim}")
    return a.entries @ psi.amplitudes


def expectation(psi: StateVector, a: OperatorMatrix) -> float:
    """<psi|a|psi> for Hermitian ``a``; the imaginary residue must vanish."""
    if a.dim != psi.dim:
        raise ValidationError(f"dimension mismatch: operator {a.dim}, state {psi.dim}")
    _require_hermitian(a)
    value = complex(np.vdot(psi.amplitudes, a.entries @ psi.amplitudes))
    if abs(value.imag) > C.EXPECTATION_IMAG_TOL:
        raise InvariantError(f"expectation has imaginary part {value.imag:.3g}")
    return value.real


def commutator_norm(a: OperatorMatrix, b: OperatorMatrix) -> float:
    """Max-entry norm of ab - ba."""
    _same_dims(a, b)
    return float(np.abs(a.entries @ b.entries - b.entries @ a.entries).max())


def operator_norm(a: OperatorMatrix) -> float:
    """Spectral norm; Hermitian input uses the Jacobi eigenvalues directly."""
    if hermiticity_defect(a) <= C.HERMITIAN_TOL:
        w, _ = _jacobi(a.entries)
        return float(np.abs(w).max())
    w, _ = _jacobi(a.entries.conj().T @ a.entries)
    return math.sqrt(max(float(w.max()), 0.0))


def unitary_exp(k: OperatorMatrix, eta: float) -> OperatorMatrix:
    """exp(i eta K) for Hermitian K, via its eigendecomposition."""
    w, v = eigh(k)
    return OperatorMatrix((v * np.exp(1j * eta * w)) @ v.conj().T)
