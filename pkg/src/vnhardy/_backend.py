"""Pick the sampling kernel: compiled extension if importable, else numpy."""
from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"


def available() -> tuple[str, ...]:
    return tuple(_BACKENDS)


def name() -> str:
    return _active


def kernels():
    return _BACKENDS[_active]


def use(backend: str) -> str:
    """Switch the active backend; returns the previous one."""
    global _active
    if backend not in _BACKENDS:
        raise ValueError(f"backend {backend!r} not available; have {available()}")
    prev, _active = _active, backend
    return prev
