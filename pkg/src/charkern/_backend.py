"""Select the compiled core if it is importable, else the NumPy fallback."""
import os

from . import _core_py

if os.environ.get("CHARKERN_PURE_PYTHON"):
    impl = _core_py
else:
    try:
        from . import _core as impl
    except ImportError:  # extension not built
        impl = _core_py

NAME = "cython" if impl is not _core_py else "python"

gegenbauer_table = impl.gegenbauer_table
group_gram = impl.group_gram
character_analysis = impl.character_analysis
character_synthesis = impl.character_synthesis
kernel_scores = impl.kernel_scores


def available():
    """Return the importable backends as ``{name: module}``."""
    out = {"python": _core_py}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        out["cython"] = _core
    return out
