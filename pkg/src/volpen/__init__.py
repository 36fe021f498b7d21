"""Volume penalization of Neumann problems on periodic Cartesian grids.

Modules
-------
geometry     grids, masks and the diffusivity field
analytic     closed-form 1D/2D solutions and the exact penalized spectrum
operator     sparse assembly of the penalized Laplacian
solver       constrained solves, dense spectra, condition estimates
experiments  convergence and spectrum studies with CSV output
cli          ``volpen`` command-line entry point
"""

from .geometry import (DiffusivityField, Grid1D, Grid2D, MaskField, build_mask_1d,
                       build_mask_disc, build_mask_square, diffusivity)
from .operator import apply, assemble_1d, assemble_2d
from .solver import (LeastSquaresAugment, ReplaceRow, SolverError, SpectrumResult,
                     condition_estimate, eigen_decompose, solve_constrained)

__version__ = "0.1.0"

__all__ = [
    "DiffusivityField", "Grid1D", "Grid2D", "MaskField", "build_mask_1d", "build_mask_disc",
    "build_mask_square", "diffusivity", "apply", "assemble_1d", "assemble_2d",
    "LeastSquaresAugment", "ReplaceRow", "SolverError", "SpectrumResult",
    "condition_estimate", "eigen_decompose", "solve_constrained",
]
