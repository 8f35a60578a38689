"""Backend selection for the gate kernels.

The compiled Cython module is used when it imports; otherwise (or when
``SYMBOOST_BACKEND=python`` is set) the numpy implementation takes over.
Both expose ``apply_one`` and ``run_program`` over a float64 view of the
complex amplitude array.
"""

import os

from . import _fallback

HADAMARD = _fallback.HADAMARD
NOT = _fallback.NOT
SWAP = _fallback.SWAP
PHASE = _fallback.PHASE

BACKENDS = {"python": _fallback}

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

_requested = os.environ.get("SYMBOOST_BACKEND", "").strip().lower()
if _requested and _requested not in BACKENDS:
    raise ImportError(f"SYMBOOST_BACKEND={_requested!r} is not available; have {sorted(BACKENDS)}")

BACKEND = _requested or ("cython" if _compiled is not None else "python")
_impl = BACKENDS[BACKEND]


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    return BACKENDS[name or BACKEND]


def apply_one(flat, n_qubits, kind, t1, t2, cmask, angle):
    _impl.apply_one(flat, n_qubits, kind, t1, t2, cmask, angle)


def run_program(flat, n_qubits, kinds, t1, t2, cmask, angles):
    _impl.run_program(flat, n_qubits, kinds, t1, t2, cmask, angles)
