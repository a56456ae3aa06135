"""Joint alignment and reconstruction for multi-modal undersampled MRI.

Images and k-space are complex (H, W) arrays. Masks are 1D uint8 arrays of
column flags. Displacement and edge fields are (2, H, W) float arrays with
the column component first.
"""

from ._core import (
    DimensionError,
    Error,
    FormatError,
    InvalidInput,
    InvalidParameter,
    InvalidSpec,
    NumericalError,
    SolverConfig,
    acquire,
    adjoint_masked,
    data_consistency,
    dtv,
    edge_field,
    evaluate,
    fft2c,
    forward_masked,
    ifft2c,
    inverse_field,
    make_mask,
    mean_endpoint_error,
    misalign,
    phantom_pair,
    prox_dtv,
    prox_tv,
    read_grid,
    reconstruct,
    tv,
    warp,
    write_grid,
    zero_filled,
)

__all__ = [
    "DimensionError",
    "Error",
    "FormatError",
    "InvalidInput",
    "InvalidParameter",
    "InvalidSpec",
    "NumericalError",
    "SolverConfig",
    "acquire",
    "adjoint_masked",
    "data_consistency",
    "dtv",
    "edge_field",
    "evaluate",
    "fft2c",
    "forward_masked",
    "ifft2c",
    "inverse_field",
    "make_mask",
    "mean_endpoint_error",
    "misalign",
    "phantom_pair",
    "prox_dtv",
    "prox_tv",
    "read_grid",
    "reconstruct",
    "tv",
    "warp",
    "write_grid",
    "zero_filled",
]

__version__ = "0.1.0"
