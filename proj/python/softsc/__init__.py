"""Sample-and-select engine.

Generate or ingest candidate outputs with per-token probabilities, select
one by majority voting or probability-aggregation scoring, stop sampling
adaptively, and analyze score calibration. The heavy lifting lives in the
C++ extension module ``softsc._core``.
"""

import os

# Development builds leave the extension in the CMake build tree; wheels
# install it next to this file.
_core_dir = os.environ.get("SOFTSC_CORE_DIR")
if _core_dir:
    __path__.append(_core_dir)

from softsc._core import *  # noqa: F401,F403
from softsc._core import __version__  # noqa: F401
