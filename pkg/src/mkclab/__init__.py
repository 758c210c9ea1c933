"""Numerical and exact checks of GHZ-based contextuality arguments.

Modules:

* ``linalg``: small dense complex matrices, tensor products and a Jacobi
  eigensolver for Hermitian operators.
* ``ghz``: the three-qubit GHZ state, spin observables, correlations and
  misalignment sweeps.
* ``hvm``: valuations of the six spin observables, the parity identity and the
  exact max-min linear program over product-form models.
* ``mkc``: rational directions, triplet sets and non-local commuting triplets.
* ``experiment`` / ``pipelines`` / ``cli``: Monte Carlo rounds, end-to-end
  reports and the command-line interface.
"""
from ._kernels import BACKEND
from .errors import InvariantError, ValidationError
from .experiment import ExperimentConfig, ExperimentSummary, Model, RoundRecord, run_experiment
from .pipelines import pipeline_section2, pipeline_section3

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ExperimentConfig",
    "ExperimentSummary",
    "InvariantError",
    "Model",
    "RoundRecord",
    "ValidationError",
    "pipeline_section2",
    "pipeline_section3",
    "run_experiment",
]
