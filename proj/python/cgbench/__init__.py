"""Python surface for the code-generation benchmarking core.

The heavy lifting lives in the compiled `_cgbench` module; this package just
re-exports it so `import cgbench` works both from an installed wheel and from
a build tree on PYTHONPATH.
"""

try:
    from ._cgbench import *  # noqa: F401,F403
    from . import _cgbench as _impl
except ImportError:  # build-tree layout: extension sits next to the package
    from _cgbench import *  # noqa: F401,F403
    import _cgbench as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
