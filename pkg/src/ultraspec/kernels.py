"""Backend selection for the hot numerical kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy versions in ``_pykernels`` are used. Setting ``ULTRASPEC_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("ULTRASPEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

assoc_max = _impl.assoc_max
laguerre_table = _impl.laguerre_table
hermite_table = _impl.hermite_table


def get_backend(name=None):
    """Return the kernel module for ``name`` ('python', 'cython') or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
