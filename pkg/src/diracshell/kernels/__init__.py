"""Hot numerical kernels with a compiled core and a pure-Python fallback.

The compiled Cython extension is preferred when importable; set
DIRACSHELL_BACKEND=python or =cython to force a choice (the latter raises if
the extension is missing).  Both backends implement the same contract and are
compared entry-for-entry in the test-suite and the benchmark.
"""

from __future__ import annotations

import os


def _load():
    forced = os.environ.get("DIRACSHELL_BACKEND", "").lower()
    if forced not in ("", "cython", "python"):
        raise ValueError(f"DIRACSHELL_BACKEND must be 'cython' or 'python', got {forced!r}")
    if forced in ("", "cython"):
        try:
            from . import _cy as mod
            return mod, "cython"
        except ImportError:
            if forced == "cython":
                raise
    from . import _py as mod

    return mod, "python"


_mod, backend_name = _load()
assemble_m_rows = _mod.assemble_m_rows
eval_potential = _mod.eval_potential


def get_backend() -> str:
    """Name of the active kernel backend ('cython' or 'python')."""
    return backend_name
