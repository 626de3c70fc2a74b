"""Invariants and inequality checks for immersed minimal surfaces."""

try:
    from ._tractlab import *  # noqa: F401,F403  (wheel layout)
except ImportError:  # pragma: no cover - in-tree build puts the module on sys.path
    from _tractlab import *  # noqa: F401,F403
