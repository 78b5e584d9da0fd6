"""voxlab: declarative spatial-logic analysis of volumetric medical images."""

__version__ = "0.1.0"

from .pointset import PointSet, UniverseMismatchError
from .space import (
    ClosureSpace,
    Connectivity,
    GridSpace,
    GridSpec,
    Relation,
    classify_space,
    closure_of,
    grid_relation,
    induced_relation,
    induced_space,
    interior_of,
    lift,
)
from .logic import (
    Atom,
    BackwardReach,
    ClosureModel,
    FALSE,
    Formula,
    ForwardReach,
    Near,
    Not,
    And,
    TRUE,
    brute_force_check,
    check,
    sat_backward_reach,
    sat_forward_reach,
)
from .volumes import (
    BinaryMask,
    DType,
    MaskStats,
    ThresholdOp,
    VoxelVolume,
    dice,
    mask_stats,
    mask_to_pointset,
    mask_to_volume,
    pointset_to_mask,
    threshold,
    volume_to_mask,
)
from .nifti import NiftiError, read_nifti, write_nifti

__all__ = [
    "And",
    "Atom",
    "BackwardReach",
    "BinaryMask",
    "ClosureModel",
    "ClosureSpace",
    "Connectivity",
    "DType",
    "FALSE",
    "Formula",
    "ForwardReach",
    "GridSpace",
    "GridSpec",
    "MaskStats",
    "Near",
    "NiftiError",
    "Not",
    "PointSet",
    "Relation",
    "TRUE",
    "ThresholdOp",
    "UniverseMismatchError",
    "VoxelVolume",
    "brute_force_check",
    "check",
    "classify_space",
    "closure_of",
    "dice",
    "grid_relation",
    "induced_relation",
    "induced_space",
    "interior_of",
    "lift",
    "mask_stats",
    "mask_to_pointset",
    "mask_to_volume",
    "pointset_to_mask",
    "read_nifti",
    "sat_backward_reach",
    "sat_forward_reach",
    "threshold",
    "volume_to_mask",
    "write_nifti",
]
