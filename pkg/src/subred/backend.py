"""Backend selection for the rejection-kernel inner loops.

The compiled Cython core is used when the extension built; setting the
environment variable ``SUBRED_BACKEND=pure`` forces the pure-Python loops
(``SUBRED_BACKEND=compiled`` instead raises if the extension is missing).
Both backends consume the random stream identically, so outputs are
bit-identical for a given seed either way.
"""

import os

from subred import _mrkpure

try:
    from subred import _mrkcore
except ImportError:
    _mrkcore = None

_choice = os.environ.get("SUBRED_BACKEND", "").strip().lower()
if _choice == "pure":
    _impl = _mrkpure
elif _choice == "compiled":
    if _mrkcore is None:
        raise ImportError("SUBRED_BACKEND=compiled but subred._mrkcore is not built")
    _impl = _mrkcore
elif _choice:
    raise ValueError(f"unknown SUBRED_BACKEND value: {_choice!r}")
else:
    _impl = _mrkcore if _mrkcore is not None else _mrkpure

mrk_bernoulli_batch = _impl.mrk_bernoulli_batch
mrk_gaussian_batch = _impl.mrk_gaussian_batch


def backend_name():
    return "compiled" if _impl is _mrkcore else "pure"


def have_compiled():
    return _mrkcore is not None
