"""WLAN fingerprint indoor localization toolkit.

Thin wrapper over the C++ core: radio-map simulation, kernel fuzzy c-means
labeling, class-matching semi-supervised discriminant embedding and
KNN positioning.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
