#include "posenorm/geometry.hpp"

#include <cmath>

namespace posenorm {

Mat2 rotation_matrix(double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  return {c, -s, s, c};
}

double signed_angle(const Vec2& v, const Vec2& target) {
  if (v.norm() == 0.0) throw ZeroVector("signed_angle of zero vector");
  double theta = std::atan2(v.cross(target), v.dot(target));
  if (theta == -kPi) theta = kPi;  // atan2(-0, negative) lands on the branch cut
  return theta;
}

double signed_angle_to_vertical(const Vec2& v) { return signed_angle(v, Vec2{0.0, -1.0}); }

Vec2 transform_point(const Transform2D& t, const Vec2& p) {
  return t.rotation * (p - t.center) + t.center;
}

Transform2D invert(const Transform2D& t) { return {t.rotation.transposed(), t.center}; }

namespace {

struct SamplePlan {
  // per output pixel: base index of the top-left source pixel (or -1 when all
  // four taps fall outside) and the four bilinear weights
  std::vector<int> x0, y0;
  std::vector<double> fx, fy;
};

SamplePlan plan_samples(int h, int w, const Transform2D& t) {
  SamplePlan plan;
  const size_t n = static_cast<size_t>(h) * w;
  plan.x0.resize(n);
  plan.y0.resize(n);
  plan.fx.resize(n);
  plan.fy.resize(n);
  const Mat2 rinv = t.rotation.transposed();
  size_t i = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x, ++i) {
      Vec2 s = rinv * (Vec2{static_cast<double>(x), static_cast<double>(y)} - t.center) + t.center;
      double xf = std::floor(s.x), yf = std::floor(s.y);
      plan.x0[i] = static_cast<int>(xf);
      plan.y0[i] = static_cast<int>(yf);
      plan.fx[i] = s.x - xf;
      plan.fy[i] = s.y - yf;
    }
  }
  return plan;
}

inline bool in_bounds(int x, int y, int w, int h) { return x >= 0 && x < w && y >= 0 && y < h; }

std::vector<char> subset_mask(int channels, std::span<const int> subset) {
  std::vector<char> warp_ch(channels, subset.empty() ? 1 : 0);
  for (int c : subset) {
    if (c < 0 || c >= channels) throw ShapeMismatch("channel subset index out of range");
    warp_ch[c] = 1;
  }
  return warp_ch;
}

}  // namespace

ScoreMap warp_map(const ScoreMap& m, const Transform2D& t, std::span<const int> channel_subset) {
  const std::vector<char> warp_ch = subset_mask(m.channels, channel_subset);
  const SamplePlan plan = plan_samples(m.height, m.width, t);
  const int h = m.height, w = m.width;

  ScoreMap out = m;  // untouched channels keep their input bits
  for (int c = 0; c < m.channels; ++c) {
    if (!warp_ch[c]) continue;
    const float* in = m.plane(c);
    float* op = out.plane(c);
    const size_t n = m.plane_size();
    for (size_t i = 0; i < n; ++i) {
      int x0 = plan.x0[i], y0 = plan.y0[i];
      double fx = plan.fx[i], fy = plan.fy[i];
      double v00 = in_bounds(x0, y0, w, h) ? in[static_cast<size_t>(y0) * w + x0] : 0.0;
      double v01 = in_bounds(x0 + 1, y0, w, h) ? in[static_cast<size_t>(y0) * w + x0 + 1] : 0.0;
      double v10 = in_bounds(x0, y0 + 1, w, h) ? in[static_cast<size_t>(y0 + 1) * w + x0] : 0.0;
      double v11 = in_bounds(x0 + 1, y0 + 1, w, h) ? in[static_cast<size_t>(y0 + 1) * w + x0 + 1] : 0.0;
      double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
      op[i] = static_cast<float>(v);
    }
  }
  return out;
}

ScoreMap warp_backward(const ScoreMap& grad_out, const Transform2D& t,
                       std::span<const int> channel_subset) {
  const std::vector<char> warp_ch = subset_mask(grad_out.channels, channel_subset);
  const SamplePlan plan = plan_samples(grad_out.height, grad_out.width, t);
  const int h = grad_out.height, w = grad_out.width;

  ScoreMap grad_in(grad_out.channels, h, w, 0.0f);
  for (int c = 0; c < grad_out.channels; ++c) {
    const float* g = grad_out.plane(c);
    float* gi = grad_in.plane(c);
    const size_t n = grad_out.plane_size();
    if (!warp_ch[c]) {
      // adjoint of the identity copy
      std::copy_n(g, n, gi);
      continue;
    }
    for (size_t i = 0; i < n; ++i) {
      double gv = g[i];
      if (gv == 0.0) continue;
      int x0 = plan.x0[i], y0 = plan.y0[i];
      double fx = plan.fx[i], fy = plan.fy[i];
      if (in_bounds(x0, y0, w, h)) gi[static_cast<size_t>(y0) * w + x0] += static_cast<float>(gv * (1.0 - fx) * (1.0 - fy));
      if (in_bounds(x0 + 1, y0, w, h)) gi[static_cast<size_t>(y0) * w + x0 + 1] += static_cast<float>(gv * fx * (1.0 - fy));
      if (in_bounds(x0, y0 + 1, w, h)) gi[static_cast<size_t>(y0 + 1) * w + x0] += static_cast<float>(gv * (1.0 - fx) * fy);
      if (in_bounds(x0 + 1, y0 + 1, w, h)) gi[static_cast<size_t>(y0 + 1) * w + x0 + 1] += static_cast<float>(gv * fx * fy);
    }
  }
  return grad_in;
}

}  // namespace posenorm
