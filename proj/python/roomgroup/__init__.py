"""Group listing photos into room spaces and assign bed types."""

from ._core import (
    RoomgroupError,
    adjusted_rand_index,
    classify_room_type,
    evaluate,
    generate_property,
    jacobi_eigen,
    normalized_ari,
    normalized_laplacian,
    remove_noise,
    run_pipeline,
    spectral_cluster,
    v_measure,
)

__all__ = [
    "RoomgroupError",
    "adjusted_rand_index",
    "classify_room_type",
    "evaluate",
    "generate_property",
    "jacobi_eigen",
    "normalized_ari",
    "normalized_laplacian",
    "remove_noise",
    "run_pipeline",
    "spectral_cluster",
    "v_measure",
]
