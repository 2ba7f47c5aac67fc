"""Hot-kernel backend selection.

The compiled extension (Cython) is preferred; the pure-numpy fallback is
used when the extension has not been built.  `BACKEND` records which one
was picked at import time.
"""

try:
    from fluxdiode._kernels import _core as _impl
    BACKEND = "cython"
except ImportError:
    from fluxdiode._kernels import _fallback as _impl
    BACKEND = "python"

hyp0f2 = _impl.hyp0f2
duffing_magsq = _impl.duffing_magsq


def load_backend(name: str):
    """Import a specific backend module ('cython' or 'python').

    Raises ImportError if the compiled backend is requested but not built.
    Used by the benchmark and by tests that compare the two.
    """
    if name == "cython":
        from fluxdiode._kernels import _core
        return _core
    if name == "python":
        from fluxdiode._kernels import _fallback
        return _fallback
    raise ValueError(f"unknown backend {name!r}")
