"""Breather: polychromatic localized solutions of dispersive nonlinear
Maxwell equations at a material interface.

Subpackages
-----------
susceptibility : material models and exact Fourier-Laplace transforms
pencil         : interface operator pencil, dispersion relations, spectra
resolvent      : analytic and staggered-grid finite-difference solvers
series         : the recursive harmonic construction and diagnostics
checks         : numeric verification of the working hypotheses
cli            : batch driver emitting CSV/JSON tables and SVG plots
"""

__version__ = "0.1.0"
