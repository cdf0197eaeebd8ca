"""Kernel backend selection.

The compiled numba kernels are used unless ``BMRF_SSM_DISABLE_JIT`` is set to
a non-empty value other than ``0``, or numba cannot be imported. Both backends
expose the same functions with identical results.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

ENV_FLAG = "BMRF_SSM_DISABLE_JIT"


def _jit_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip() not in ("", "0")


def load(name: str) -> ModuleType:
    """Return the kernel module for ``name`` ('numba' or 'numpy')."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f"bmrf_ssm._kernels_{name}")


def available() -> list[str]:
    names = ["numpy"]
    try:
        load("numba")
    except ImportError:
        return names
    return ["numba", *names]


def _select() -> tuple[str, ModuleType]:
    if not _jit_disabled():
        try:
            return "numba", load("numba")
        except ImportError:
            pass
    return "numpy", load("numpy")


BACKEND, kernels = _select()
