"""Curvature toolkit: closed-form Ricci tensors of warped and scaled bundle
metrics, a finite-difference chart oracle that validates them, a minimal
sphere-dimension positivity search, and an exact certificate calculus for
iterated bundle constructions."""

__version__ = "0.1.0"

from . import bundlecalc, exprs, oracle, positivity, variation, warped  # noqa: F401
