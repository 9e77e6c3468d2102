#include "posenorm/normalize.hpp"

#include <cmath>

namespace posenorm {

StampedTransform body_transform_params(const KeypointSet& kp, const Skeleton& sk, double eps_pos) {
  validate_keypoints(kp, sk);
  Vec2 c = torso_center(kp, sk);
  Vec2 v = kp.points[sk.neck_index] - c;
  if (v.norm() < eps_pos) {
    return {Transform2D::identity(), TransformFlag::degenerate_identity};
  }
  double theta = signed_angle_to_vertical(v);
  return {Transform2D::rotation_about(theta, c), TransformFlag::applied};
}

ScoreMap body_normalize(const ScoreMap& m, const Transform2D& t) { return warp_map(m, t); }

StampedTransform limb_transform_params(const KeypointSet& kp, const Skeleton& sk, int limb_index,
                                       double eps_pos) {
  validate_keypoints(kp, sk);
  if (limb_index < 0 || limb_index >= kNumLimbs) throw ShapeMismatch("limb index out of range");
  const LimbDef& limb = sk.limb_defs[limb_index];
  Vec2 root = kp.points[limb.root];
  Vec2 v = kp.points[limb.middle] - root;
  if (v.norm() < eps_pos) {
    return {Transform2D::identity(), TransformFlag::degenerate_identity};
  }
  double theta = signed_angle(v, Vec2{0.0, 1.0});  // vertical downward
  return {Transform2D::rotation_about(theta, root), TransformFlag::applied};
}

ScoreMap limb_normalize(const ScoreMap& m, const Skeleton& sk, int limb_index,
                        const Transform2D& t) {
  const LimbDef& limb = sk.limb_defs[limb_index];
  const int subset[3] = {limb.root, limb.middle, limb.end};
  return warp_map(m, t, std::span<const int>(subset, 3));
}

KeypointSet denormalize_points(const KeypointSet& kp, const NormalizationRecord& rec,
                               const Skeleton& sk) {
  KeypointSet out = kp;
  Transform2D body_inv = invert(rec.body.t);
  for (int l = 0; l < kNumLimbs; ++l) {
    const LimbDef& limb = sk.limb_defs[l];
    Transform2D limb_inv = invert(rec.limbs[l].t);
    out.points[limb.middle] = transform_point(limb_inv, out.points[limb.middle]);
    out.points[limb.end] = transform_point(limb_inv, out.points[limb.end]);
  }
  for (Vec2& p : out.points) p = transform_point(body_inv, p);
  return out;
}

KeypointSet normalize_points(const KeypointSet& kp, const NormalizationRecord& rec,
                             const Skeleton& sk) {
  KeypointSet out = kp;
  for (Vec2& p : out.points) p = transform_point(rec.body.t, p);
  for (int l = 0; l < kNumLimbs; ++l) {
    const LimbDef& limb = sk.limb_defs[l];
    out.points[limb.middle] = transform_point(rec.limbs[l].t, out.points[limb.middle]);
    out.points[limb.end] = transform_point(rec.limbs[l].t, out.points[limb.end]);
  }
  return out;
}

namespace {

bool rec_is_identity(const StampedTransform& st) {
  return st.flag == TransformFlag::degenerate_identity;
}

// Stage-2 networks expect K joint channels plus background. The global net
// outputs K joint channels; the background channel rides along from the
// normalized detector maps.
ScoreMap with_background(const ScoreMap& joints, const ScoreMap& source, int k) {
  if (joints.channels == k + 1) return joints;
  ScoreMap out(k + 1, joints.height, joints.width);
  std::copy(joints.data.begin(), joints.data.end(), out.data.begin());
  std::copy_n(source.plane(k), source.plane_size(), out.plane(k));
  return out;
}

}  // namespace

PipelineResult run_pipeline(const ScoreMap& detector_maps, const Skeleton& sk,
                            const PipelineConfig& cfg, const RefineNets& nets) {
  const int k = sk.num_joints();
  if (detector_maps.channels < k) throw ShapeMismatch("detector maps have too few channels");

  PipelineResult res;
  res.detector_keypoints =
      extract_positions(detector_maps, sk, cfg.extract_blur_sigma, cfg.extract_mode);

  // Stage 1: body normalization + global refinement.
  res.record.body = cfg.normalize ? body_transform_params(res.detector_keypoints, sk, cfg.eps_pos)
                                  : StampedTransform{Transform2D::identity(),
                                                     TransformFlag::degenerate_identity};
  ScoreMap normalized = rec_is_identity(res.record.body)
                            ? detector_maps
                            : body_normalize(detector_maps, res.record.body.t);

  ScoreMap refined = nets.global != nullptr ? net_apply(*nets.global, normalized) : normalized;
  KeypointSet stage1 = extract_positions(refined, sk, cfg.extract_blur_sigma, cfg.extract_mode);

  {
    KeypointSet s1 = stage1;
    Transform2D body_inv = invert(res.record.body.t);
    for (Vec2& p : s1.points) p = transform_point(body_inv, p);
    res.stage1_keypoints = s1;
  }

  // Stage 2: per-limb normalization + refinement on the stage-1 maps.
  ScoreMap stage2_input = with_background(refined, normalized, k);
  KeypointSet mixed = stage1;  // limb joints overwritten below, rest stays stage-1
  for (int l = 0; l < kNumLimbs; ++l) {
    const LimbDef& limb = sk.limb_defs[l];
    res.record.limbs[l] = cfg.normalize
                              ? limb_transform_params(stage1, sk, l, cfg.eps_pos)
                              : StampedTransform{Transform2D::identity(),
                                                 TransformFlag::degenerate_identity};
    ScoreMap limb_maps = rec_is_identity(res.record.limbs[l])
                             ? stage2_input
                             : limb_normalize(stage2_input, sk, l, res.record.limbs[l].t);

    if (nets.limbs[l] != nullptr) {
      ScoreMap out = net_apply(*nets.limbs[l], limb_maps);  // channels: root, middle, end
      mixed.points[limb.middle] = extract_channel_peak(out, 1, cfg.extract_blur_sigma,
                                                       cfg.extract_mode);
      mixed.points[limb.end] = extract_channel_peak(out, 2, cfg.extract_blur_sigma,
                                                    cfg.extract_mode);
    } else {
      mixed.points[limb.middle] = extract_channel_peak(limb_maps, limb.middle,
                                                       cfg.extract_blur_sigma, cfg.extract_mode);
      mixed.points[limb.end] = extract_channel_peak(limb_maps, limb.end, cfg.extract_blur_sigma,
                                                    cfg.extract_mode);
    }
  }

  res.final_keypoints = denormalize_points(mixed, res.record, sk);
  res.stage1_body_frame = stage1;
  res.normalized_maps = std::move(normalized);
  res.stage2_input = std::move(stage2_input);
  return res;
}

}  // namespace posenorm
