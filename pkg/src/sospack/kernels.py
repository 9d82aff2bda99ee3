"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``SOSPACK_PURE=1`` to force the fallback.  Both backends expose
``choose(packing, spec, s)`` and
``pack_block(packing, spec, sizes, imag, start, stop, buckets)``.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels
from ._pykernels import (  # noqa: F401  (re-exported policy codes)
    P_BF,
    P_PERFECT,
    P_SINF,
    P_SMAXH,
    P_SMINH,
    P_SRS_FLT,
    P_SRS_INT,
    P_SS,
    P_SSD,
    P_WSS_FLT,
    P_WSS_INT,
)

_compiled = None
if os.environ.get("SOSPACK_PURE") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
MARGIN = 1e-12


class KernelSpec:
    """Flat description of a choose rule, readable by both backends."""

    def __init__(self, code: int, B: int, dmask=None, wint=None, wflt=None, r_int: int = 2, r_flt: float = 2.0):
        self.code = code
        self.B = B
        self.dmask = np.zeros(B + 1, dtype=np.uint8) if dmask is None else np.ascontiguousarray(dmask, dtype=np.uint8)
        self.wint = np.zeros(B + 1, dtype=np.int64) if wint is None else np.ascontiguousarray(wint, dtype=np.int64)
        self.wflt = np.zeros(B + 1, dtype=np.float64) if wflt is None else np.ascontiguousarray(wflt, dtype=np.float64)
        self.r_int = int(r_int)
        self.r_flt = float(r_flt)
        self.margin = MARGIN
        self.dmask_list = self.dmask.tolist()
        self.wint_list = self.wint.tolist()
        self.wflt_list = self.wflt.tolist()

    def set_dmask(self, dmask) -> None:
        self.dmask = np.ascontiguousarray(dmask, dtype=np.uint8)
        self.dmask_list = self.dmask.tolist()


def _int_safe(packing, spec: KernelSpec, extra: int) -> bool:
    """Whether int64 arithmetic cannot overflow for this block."""
    if spec.code == P_SRS_INT:
        bound = int(packing.counts.max()) + extra + 1
        return bound ** spec.r_int < 2**61
    if spec.code == P_WSS_INT:
        bound = 2 * (int(packing.counts.max()) + extra) + 1
        return 2 * bound * int(spec.wint.max()) < 2**62
    return True


def choose(packing, spec: KernelSpec, s: int, backend=None) -> int:
    mod = _pick(backend)
    if mod is _compiled and not _int_safe(packing, spec, 0):
        mod = _pykernels
    return int(mod.choose(packing, spec, int(s)))


def pack_block(packing, spec: KernelSpec, sizes, imag=None, start: int = 0, stop=None, buckets=None, backend=None):
    sizes = np.ascontiguousarray(sizes, dtype=np.int32)
    if stop is None:
        stop = sizes.shape[0]
    if imag is not None:
        imag = np.ascontiguousarray(imag, dtype=np.uint8)
    if stop <= start:
        return
    packing.ensure_capacity(stop - start)
    mod = _pick(backend)
    if mod is _compiled and not _int_safe(packing, spec, stop - start):
        mod = _pykernels
    mod.pack_block(packing, spec, sizes, imag, start, stop, buckets)


def _pick(backend):
    if backend is None:
        return _compiled if _compiled is not None else _pykernels
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
