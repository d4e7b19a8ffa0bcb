"""Sparse recovery under the Earth Mover Distance.

Images are square float64 arrays with a power-of-two side. Pyramid
coefficient vectors list cells root first, level by level, row-major within
a level.
"""

from ._core import (
    SchemeConfig,
    alignment_certificate,
    emd_distance,
    emd_norm,
    generate,
    haar_inverse,
    haar_transform,
    pyramid_invert,
    pyramid_transform,
    recover,
    run_trial,
    schemes,
    sketch,
    strict_sparsify,
    tree_project,
)

__all__ = [
    "SchemeConfig",
    "alignment_certificate",
    "emd_distance",
    "emd_norm",
    "generate",
    "haar_inverse",
    "haar_transform",
    "pyramid_invert",
    "pyramid_transform",
    "recover",
    "run_trial",
    "schemes",
    "sketch",
    "strict_sparsify",
    "tree_project",
]
