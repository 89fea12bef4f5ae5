"""Select the compiled kernels when available, else the numpy fallback.

Set ``WIGPROP_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

NAME = "python"
kernels = _pykernels

if os.environ.get("WIGPROP_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as kernels  # type: ignore[no-redef]
        NAME = "cython"
    except ImportError:
        pass

lag_products = kernels.lag_products
shear = kernels.shear
lag_products_2d = kernels.lag_products_2d
type1_sum = kernels.type1_sum
interp_bilinear = kernels.interp_bilinear
transport_marginals = kernels.transport_marginals


def set_threads(count: int) -> None:
    """Thread count for the compiled kernels; a no-op for the numpy fallback."""
    if count < 1:
        raise ValueError("thread count must be >= 1")
    setter = getattr(kernels, "set_num_threads", None)
    if setter is not None:
        setter(int(count))
