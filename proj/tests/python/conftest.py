import glob
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(os.path.dirname(HERE))

# Source layout: make the package importable.
sys.path.insert(0, os.path.join(ROOT, "python"))

# Point the package at a CMake-built extension when not pip-installed.
if not os.environ.get("SOFTSC_CORE_DIR"):
    candidates = sorted(
        glob.glob(os.path.join(ROOT, "build*", "bindings", "_core*.so"))
    )
    if candidates:
        os.environ["SOFTSC_CORE_DIR"] = os.path.dirname(candidates[-1])
