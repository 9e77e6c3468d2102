#include "posenorm/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace posenorm {

namespace {

Skeleton build_canonical() {
  Skeleton sk;
  sk.joint_names = {"r-ankle",    "r-knee",  "r-hip",      "l-hip",  "l-knee",
                    "l-ankle",    "r-wrist", "r-elbow",    "r-shoulder",
                    "l-shoulder", "l-elbow", "l-wrist",    "neck",   "head-top"};
  sk.limb_defs = {LimbDef{9, 10, 11, "l-arm"}, LimbDef{8, 7, 6, "r-arm"},
                  LimbDef{3, 4, 5, "l-leg"}, LimbDef{2, 1, 0, "r-leg"}};
  sk.torso_joints = {9, 8, 3, 2};
  sk.neck_index = 12;
  sk.head_index = 13;
  return sk;
}

}  // namespace

const Skeleton& canonical_skeleton() {
  static const Skeleton sk = build_canonical();
  return sk;
}

int Skeleton::joint_index(const std::string& name) const {
  for (int i = 0; i < num_joints(); ++i) {
    if (joint_names[i] == name) return i;
  }
  return -1;
}

int Skeleton::limb_of_joint(int joint) const {
  for (int l = 0; l < static_cast<int>(limb_defs.size()); ++l) {
    const LimbDef& d = limb_defs[l];
    if (d.root == joint || d.middle == joint || d.end == joint) return l;
  }
  return -1;
}

bool Skeleton::is_limb_output_joint(int joint) const {
  for (const LimbDef& d : limb_defs) {
    if (d.middle == joint || d.end == joint) return true;
  }
  return false;
}

int Skeleton::flipped_joint(int joint) const {
  static const int pairs[14] = {5, 4, 3, 2, 1, 0, 11, 10, 9, 8, 7, 6, 12, 13};
  return pairs[joint];
}

void validate_keypoints(const KeypointSet& kp, const Skeleton& sk) {
  if (kp.size() != sk.num_joints() || static_cast<int>(kp.visible.size()) != sk.num_joints()) {
    throw ShapeMismatch("keypoint set size does not match skeleton");
  }
  for (const Vec2& p : kp.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ShapeMismatch("keypoint coordinates must be finite");
    }
  }
}

Vec2 torso_center(const KeypointSet& kp, const Skeleton& sk) {
  Vec2 sum;
  for (int j : sk.torso_joints) sum = sum + kp.points[j];
  return sum * 0.25;
}

}  // namespace posenorm
