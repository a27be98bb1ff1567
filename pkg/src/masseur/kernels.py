"""Kernel backend selection.

The compiled extension is used when it was built and ``MASSEUR_PURE_PYTHON``
is unset; otherwise the pure-Python twin runs. Both give the same numbers.
"""
import os

BACKEND = "python"

if os.environ.get("MASSEUR_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from ._kernels import admittance_rollout, force_loop
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import admittance_rollout, force_loop

__all__ = ["BACKEND", "admittance_rollout", "force_loop"]
