"""heunlock: monodromy spectral equations for the forced Josephson junction,
cross-validated against direct integration of the torus flow."""

from . import bessel, errors, flow, heun, matprod, spectral  # noqa: F401

__version__ = "0.1.0"
