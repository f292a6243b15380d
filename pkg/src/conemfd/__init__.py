"""Numerical toolkit for constant-curvature cone-manifolds.

Submodules cover model metrics and finite-difference operator identities,
singular germs, football spectra, indicial roots, the edge normal operator
with modified Bessel functions, and infinitesimal rigidity of polyhedra.
"""

__version__ = "0.1.0"
