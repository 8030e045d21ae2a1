"""Teager-Kaiser operator statistics toolkit."""

try:
    from ._tkostat import *  # noqa: F401,F403
    from ._tkostat import __doc__ as _core_doc  # noqa: F401
except ImportError:
    # in-tree builds place the extension on sys.path instead of in the package
    from _tkostat import *  # noqa: F401,F403
