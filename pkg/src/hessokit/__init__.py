"""hessokit: desk-scale potential theory for m-subharmonic functions.

Cone algebra for elementary symmetric polynomials, pointwise Hermitian form
calculus, grid discretizations of domains in C^n, Hessian measures of smooth
and bounded functions, m-capacity experiments, and a monotone finite-difference
solver for the complex m-Hessian Dirichlet problem.
"""

from .errors import ApproximationError, ConeError, StructuralError

__version__ = "0.1.0"

__all__ = ["ApproximationError", "ConeError", "StructuralError", "__version__"]
