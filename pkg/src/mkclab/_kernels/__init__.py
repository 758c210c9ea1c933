"""Hot kernels with a compiled backend and a numpy fallback.

The Cython extension is used when it was built and ``MKCLAB_PURE_PYTHON`` is
not set. Both backends expose the same functions; sampled streams are
identical across backends.
"""
import os

from . import pykernels

_impl = pykernels
if not os.environ.get("MKCLAB_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND: str = _impl.BACKEND
COMBO_AXES = pykernels.COMBO_AXES

counter_uniforms = _impl.counter_uniforms
sample_contextual = _impl.sample_contextual
sample_product = _impl.sample_product
pythagorean_quadruples = _impl.pythagorean_quadruples
jacobi_hermitian = _impl.jacobi_hermitian

__all__ = [
    "BACKEND",
    "COMBO_AXES",
    "counter_uniforms",
    "sample_contextual",
    "sample_product",
    "pythagorean_quadruples",
    "jacobi_hermitian",
]
