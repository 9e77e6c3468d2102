#pragma once

#include <span>
#include <vector>

#include "posenorm/common.hpp"
#include "posenorm/scoremap.hpp"

namespace posenorm {

/// 2x2 rotation matrix.
struct Mat2 {
  double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;

  Vec2 operator*(const Vec2& v) const { return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y}; }
  Mat2 transposed() const { return {m00, m10, m01, m11}; }
};

/// [[cos t, -sin t], [sin t, cos t]].
Mat2 rotation_matrix(double theta);

/// Rotation about a fixed center: p -> R (p - c) + c.
struct Transform2D {
  Mat2 rotation;
  Vec2 center;

  static Transform2D identity() { return {}; }
  static Transform2D rotation_about(double theta, Vec2 c) { return {rotation_matrix(theta), c}; }
};

/// Angle that rotates v onto the target direction, in (-pi, pi]; the
/// boundary case returns +pi. Throws ZeroVector for v = 0.
double signed_angle(const Vec2& v, const Vec2& target);

/// Angle to vertical-upward, i.e. target (0, -1) in y-down image coordinates.
double signed_angle_to_vertical(const Vec2& v);

Vec2 transform_point(const Transform2D& t, const Vec2& p);
Transform2D invert(const Transform2D& t);

/// Inverse-mapping resample: out(q) = in(R^T (q - c) + c), bilinear, zero
/// outside the source. Channels outside the subset are copied through
/// untouched; an empty subset means all channels.
ScoreMap warp_map(const ScoreMap& m, const Transform2D& t,
                  std::span<const int> channel_subset = {});

/// Adjoint of warp_map in the map values: scatters each output-pixel gradient
/// onto its four bilinear source pixels with the sampling weights. No
/// gradient flows to the transform parameters.
ScoreMap warp_backward(const ScoreMap& grad_out, const Transform2D& t,
                       std::span<const int> channel_subset = {});

}  // namespace posenorm
