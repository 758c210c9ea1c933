"""Numeric tolerances used across the package, in one place."""

# linalg
STATE_NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
EXPECTATION_IMAG_TOL = 1e-10
JACOBI_OFFDIAG_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
RECONSTRUCTION_TOL = 1e-9
ORTHONORMAL_TOL = 1e-10
PAULI_SQUARE_TOL = 1e-12
MAX_DIM = 8

# ghz
DIRECTION_NORM_TOL = 1e-12
CORRELATION_RANGE_TOL = 1e-10
PROJECTION_TOL = 1e-10
CLOSED_FORM_TOL = 1e-10
BORN_ZERO_TOL = 1e-15

# hvm
DISTRIBUTION_SUM_TOL = 1e-12
WITNESS_TOL = 1e-9

# mkc
COMMUTATOR_TOL = 1e-10
INVOLUTION_TOL = 1e-9
