"""Engine selection: compiled extension if built, numpy fallback otherwise.

Set ``CIMBRAM_ENGINE=pure`` or ``CIMBRAM_ENGINE=compiled`` to force one.
"""

import os

from . import pure

_requested = os.environ.get("CIMBRAM_ENGINE", "")

if _requested == "pure":
    active = pure
else:
    try:
        from . import _core as active  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        active = pure

step = active.step
run = active.run
NAME = active.NAME
