#pragma once

#include <array>
#include <optional>

#include "posenorm/geometry.hpp"
#include "posenorm/nnet.hpp"
#include "posenorm/scoremap.hpp"
#include "posenorm/skeleton.hpp"

namespace posenorm {

enum class TransformFlag { applied, degenerate_identity };

struct StampedTransform {
  Transform2D t;
  TransformFlag flag = TransformFlag::applied;
};

/// The transforms one image went through, kept so estimates can be mapped
/// back to the original frame.
struct NormalizationRecord {
  StampedTransform body;
  std::array<StampedTransform, 4> limbs;
};

/// Rotation about the torso center that brings the center-to-neck line
/// upright. Falls back to a flagged identity when neck and center are closer
/// than eps_pos.
StampedTransform body_transform_params(const KeypointSet& kp, const Skeleton& sk,
                                       double eps_pos = 1e-3);

/// Warp every channel (joints and background) by the body transform.
ScoreMap body_normalize(const ScoreMap& m, const Transform2D& t);

/// Rotation about the limb root that points the root-to-middle segment
/// vertically downward.
StampedTransform limb_transform_params(const KeypointSet& kp, const Skeleton& sk, int limb_index,
                                       double eps_pos = 1e-3);

/// Warp only that limb's three channels; everything else passes through
/// bit-identical.
ScoreMap limb_normalize(const ScoreMap& m, const Skeleton& sk, int limb_index,
                        const Transform2D& t);

/// Map mixed-frame estimates back to image coordinates: limb middle/end
/// joints undo their limb rotation first, then every joint undoes the body
/// rotation.
KeypointSet denormalize_points(const KeypointSet& kp, const NormalizationRecord& rec,
                               const Skeleton& sk);

/// Forward counterpart of denormalize_points on plain points, using the same
/// per-joint frame ownership. Composing the two is the identity.
KeypointSet normalize_points(const KeypointSet& kp, const NormalizationRecord& rec,
                             const Skeleton& sk);

struct PipelineConfig {
  double extract_blur_sigma = 1.5;
  ProbMap extract_mode = ProbMap::identity();
  double eps_pos = 1e-3;
  bool normalize = true;  // off = identity transforms everywhere (ablation arm)
};

/// Trained stage networks; null entries mean pass-through.
struct RefineNets {
  const TinyNet<float>* global = nullptr;
  std::array<const TinyNet<float>*, 4> limbs{};
};

struct PipelineResult {
  KeypointSet final_keypoints;
  KeypointSet detector_keypoints;  // straight extraction from the input maps
  KeypointSet stage1_keypoints;    // after global refinement, back in image frame
  NormalizationRecord record;

  // intermediates, kept for stage-wise training and inspection
  KeypointSet stage1_body_frame;  // stage-1 extraction before de-rotation
  ScoreMap normalized_maps;       // detector maps in the body frame
  ScoreMap stage2_input;          // refined joints + background, body frame
};

/// Full two-stage pass over one image: extract, body-normalize, global
/// refinement, per-limb normalize + refinement, inverse transforms.
PipelineResult run_pipeline(const ScoreMap& detector_maps, const Skeleton& sk,
                            const PipelineConfig& cfg, const RefineNets& nets);

}  // namespace posenorm
