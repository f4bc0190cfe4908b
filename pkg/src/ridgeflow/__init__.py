"""Tensor-train rank reduction via linear coordinate flows."""

__version__ = "0.1.0"

from .grid import (
    Grid1D,
    ProductGrid,
    make_periodic_grid,
    fourier_diff_matrix,
    quadrature_integrate,
)
from .tt import (
    FttTensor,
    TruncationResult,
    ftt_from_full,
    contract_full,
    linear_combine,
    hadamard,
    inner_product,
    norm,
    left_orthogonalize,
    truncate,
    singular_values,
    spatial_gradient,
)
