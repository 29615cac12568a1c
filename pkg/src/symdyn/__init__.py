"""Symbolic-dynamics toolkit for non-invertible torus maps.

Builds, at desk scale, the chain of objects leading from a concrete
endomorphism of T^2 to a finite symbolic model of it: orbit windows of
the inverse limit, scaling frames and Pesin charts, chain graphs of
double charts, stable/unstable manifolds via the graph transform, the
shadowing map, and a sample-based Markov refinement.
"""

from .errors import SymdynError

__all__ = ["SymdynError"]

__version__ = "0.1.0"
