"""Score-map pose normalization: spatial transforms, refinement nets, metrics."""

from posenorm._core import (  # noqa: F401
    KeypointSet,
    LimbDef,
    Skeleton,
    StampedTransform,
    Transform2D,
    Vec2,
    auc,
    body_normalize,
    body_transform_params,
    canonical_skeleton,
    compactness,
    extract_positions,
    fuse_scales,
    gaussian_blur,
    groundtruth_radius,
    invert,
    limb_normalize,
    limb_transform_params,
    make_groundtruth,
    pck,
    progressive_schedule,
    read_smap,
    rotation_matrix,
    run_pipeline_passthrough,
    sample_pose,
    score_to_prob,
    signed_angle_to_vertical,
    simulate_detector,
    torso_center,
    transform_point,
    warp_backward,
    warp_map,
    write_smap,
)

__version__ = "0.1.0"
