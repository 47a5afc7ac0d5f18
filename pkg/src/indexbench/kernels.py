"""Backend selection for the heat-bracket contraction kernel.

The compiled Cython kernel is preferred when it built; the numpy fallback is
always available.  Set INDEXBENCH_KERNEL=python (or =compiled) to force a
backend; the benchmark under benchmarks/ uses this to compare the two.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("INDEXBENCH_KERNEL", "").strip().lower()

if _forced == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "INDEXBENCH_KERNEL=compiled but the compiled kernel is not "
                "built; run `pip install -e . --no-build-isolation`"
            )
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
bracket_sum = _impl.bracket_sum


def available_backends() -> dict:
    """Map backend name -> bracket_sum callable for benchmarking/tests."""
    out = {"python": _kernels_py.bracket_sum}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["compiled"] = _kernels.bracket_sum
    except ImportError:
        pass
    return out
