"""Python surface of the cohort-selection core.

The compiled extension module does the work; this package just re-exports it
so `import macs` works wherever the build directory is on sys.path.
"""

from _macs import *  # noqa: F401,F403
from _macs import __version__  # noqa: F401
