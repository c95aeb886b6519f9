"""Pseudospectral tools for solitary water waves on exponentially weighted spaces.

Subpackages compute traveling-wave profiles, assemble the linearized
operator about a wave in several equivalent forms, build the analytic
Fredholm bundle used for point-spectrum counting, and run semigroup
decay diagnostics.
"""

from wavestab.spectral import Grid, SpectralField

__all__ = ["Grid", "SpectralField"]
