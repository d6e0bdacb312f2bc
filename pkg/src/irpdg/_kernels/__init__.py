"""Hot-kernel dispatch: compiled Cython core if available, numpy otherwise.

Set ``IRPDG_PURE_PYTHON=1`` to force the numpy backend (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import numpy_backend

_impl = numpy_backend
if os.environ.get("IRPDG_PURE_PYTHON", "0") != "1":
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = numpy_backend

BACKEND = _impl.BACKEND

phys_flux = _impl.phys_flux
phys_fluxes_2d = _impl.phys_fluxes_2d
max_speed = _impl.max_speed
speed_scan = _impl.speed_scan
lxf_flux = _impl.lxf_flux
lxf_local_flux = _impl.lxf_local_flux
hll_flux = _impl.hll_flux
hll_flux_davis = _impl.hll_flux_davis
hllc_flux = _impl.hllc_flux
hllc_flux_davis = _impl.hllc_flux_davis
davis_speeds = _impl.davis_speeds
functional_minmax = _impl.functional_minmax
cell_functionals = _impl.cell_functionals
scale_modes = _impl.scale_modes
