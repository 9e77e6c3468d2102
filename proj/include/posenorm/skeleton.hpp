#pragma once

#include <array>
#include <string>
#include <vector>

#include "posenorm/common.hpp"

namespace posenorm {

/// One articulated limb: three joint indices from root (on the torso) through
/// the middle hinge to the free end, e.g. shoulder / elbow / wrist.
struct LimbDef {
  int root = -1;
  int middle = -1;
  int end = -1;
  std::string name;
};

/// Canonical 14-joint full-body schema in LSP order. Joint indices are stable
/// across the whole library and the annotation format.
struct Skeleton {
  std::vector<std::string> joint_names;  // size 14
  std::array<LimbDef, 4> limb_defs;      // l-arm, r-arm, l-leg, r-leg
  std::array<int, 4> torso_joints{};     // l-shoulder, r-shoulder, l-hip, r-hip
  int neck_index = -1;
  int head_index = -1;

  int num_joints() const { return static_cast<int>(joint_names.size()); }
  int joint_index(const std::string& name) const;

  /// -1 when the joint is on no limb, else the limb index.
  int limb_of_joint(int joint) const;
  bool is_limb_output_joint(int joint) const;  // middle or end of some limb

  /// Index of the mirror-image joint (left <-> right), identity for neck and
  /// head-top. Used by horizontal-flip augmentation.
  int flipped_joint(int joint) const;
};

constexpr int kNumJoints = 14;
constexpr int kNumLimbs = 4;

/// The fixed schema every other module works against.
const Skeleton& canonical_skeleton();

/// Per-image joint positions in pixel coordinates (x right, y down) plus a
/// visibility flag per joint. Occluded joints keep their coordinates.
struct KeypointSet {
  std::vector<Vec2> points;
  std::vector<bool> visible;

  KeypointSet() = default;
  explicit KeypointSet(int k) : points(k), visible(k, true) {}
  int size() const { return static_cast<int>(points.size()); }
};

void validate_keypoints(const KeypointSet& kp, const Skeleton& sk);

/// Mean of the four torso joints (shoulders and hips); the rotation center of
/// body normalization. Visibility does not matter here.
Vec2 torso_center(const KeypointSet& kp, const Skeleton& sk);

}  // namespace posenorm
