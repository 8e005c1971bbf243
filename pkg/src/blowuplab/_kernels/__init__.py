"""Kernel backend selection: compiled extension when available, else Python.

Set BLOWUPLAB_NO_EXTENSION=1 to force the pure-Python integrator (used by
the twin-agreement tests and the benchmark).
"""

import os

from . import reference

HAVE_EXTENSION = False
backend = reference

if not os.environ.get("BLOWUPLAB_NO_EXTENSION"):
    try:
        from . import _radial_cy as _ext
    except ImportError:
        _ext = None
    if _ext is not None:
        backend = _ext
        HAVE_EXTENSION = True

integrate = backend.integrate
integrate_log_boundary = backend.integrate_log_boundary
integrate_generic = reference.integrate_generic  # callables stay in Python

KLASS_EXPLODE = reference.KLASS_EXPLODE
KLASS_SURVIVE = reference.KLASS_SURVIVE
KLASS_DEEP_END = reference.KLASS_DEEP_END

STATUS_REACHED_END = reference.STATUS_REACHED_END
STATUS_BLOWUP = reference.STATUS_BLOWUP
STATUS_UNDERFLOW = reference.STATUS_UNDERFLOW
W_CONST = reference.W_CONST
W_DISTANCE = reference.W_DISTANCE
W_CENTER = reference.W_CENTER
DEFAULT_THRESHOLDS = reference.DEFAULT_THRESHOLDS

BACKEND_NAME = "cython" if HAVE_EXTENSION else "python"
