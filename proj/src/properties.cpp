#include "posenorm/properties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "posenorm/geometry.hpp"
#include "posenorm/nnet.hpp"
#include "posenorm/rng.hpp"
#include "posenorm/scoremap.hpp"

namespace posenorm {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

ScoreMap random_map(int c, int h, int w, Rng& rng) {
  ScoreMap m(c, h, w);
  for (float& v : m.data) v = static_cast<float>(rng.uniform());
  return m;
}

double dot_maps(const ScoreMap& a, const ScoreMap& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) acc += static_cast<double>(a.data[i]) * b.data[i];
  return acc;
}

PropertyResult point_roundtrip(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Transform2D t = Transform2D::rotation_about(rng.uniform(-kPi, kPi),
                                                {rng.uniform(-50, 100), rng.uniform(-50, 100)});
    Vec2 p{rng.uniform(-100, 200), rng.uniform(-100, 200)};
    Vec2 back = transform_point(invert(t), transform_point(t, p));
    worst = std::max(worst, distance(back, p));
  }
  return {"point_roundtrip", worst <= 1e-9, "max err " + fmt(worst) + " px"};
}

PropertyResult isometry(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Transform2D t = Transform2D::rotation_about(rng.uniform(-kPi, kPi),
                                                {rng.uniform(0, 64), rng.uniform(0, 64)});
    Vec2 p{rng.uniform(0, 64), rng.uniform(0, 64)};
    Vec2 q{rng.uniform(0, 64), rng.uniform(0, 64)};
    double before = distance(p, q);
    double after = distance(transform_point(t, p), transform_point(t, q));
    worst = std::max(worst, std::abs(after - before));
  }
  return {"isometry", worst <= 1e-9, "max err " + fmt(worst) + " px"};
}

PropertyResult warp_quarter_turn_exact(Rng& rng) {
  const int n = 33;  // odd size: integer lattice center
  ScoreMap m = random_map(3, n, n, rng);
  Vec2 c{(n - 1) / 2.0, (n - 1) / 2.0};
  bool ok = true;
  for (int k = 1; k <= 3 && ok; ++k) {
    Transform2D t = Transform2D::rotation_about(k * kPi / 2.0, c);
    ScoreMap fwd = warp_map(m, t);
    ScoreMap back = warp_map(fwd, invert(t));
    ok = back.data == m.data;
  }
  // even size: the common half-integer center also lands on the lattice
  ScoreMap e = random_map(2, 32, 32, rng);
  Transform2D t = Transform2D::rotation_about(kPi / 2.0, {15.5, 15.5});
  ScoreMap back = warp_map(warp_map(e, t), invert(t));
  ok = ok && back.data == e.data;
  return {"warp_90deg_bit_exact", ok, ok ? "bit-equal round-trips" : "round-trip differs"};
}

PropertyResult warp_smooth_roundtrip(Rng& rng) {
  // blurred content well inside the canvas; round-trip error stays under 2%
  const int n = 64;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    ScoreMap m(2, n, n, 0.0f);
    for (int c = 0; c < m.channels; ++c) {
      for (int i = 0; i < 4; ++i) {
        int x = rng.uniform_int(24, 40), y = rng.uniform_int(24, 40);
        m.at(c, y, x) = static_cast<float>(rng.uniform(0.5, 1.0));
      }
    }
    m = gaussian_blur(m, 2.0);
    float mx = *std::max_element(m.data.begin(), m.data.end());
    Transform2D t = Transform2D::rotation_about(rng.uniform(-kPi, kPi),
                                                {(n - 1) / 2.0, (n - 1) / 2.0});
    ScoreMap back = warp_map(warp_map(m, t), invert(t));
    float worst = 0.0f;
    for (size_t i = 0; i < m.data.size(); ++i) {
      worst = std::max(worst, std::abs(back.data[i] - m.data[i]));
    }
    worst_ratio = std::max(worst_ratio, static_cast<double>(worst) / mx);
  }
  return {"warp_smooth_roundtrip", worst_ratio <= 0.02,
          "max err " + fmt(100.0 * worst_ratio) + "% of peak"};
}

PropertyResult warp_adjoint(Rng& rng, bool broken) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    int h = rng.uniform_int(8, 24), w = rng.uniform_int(8, 24);
    ScoreMap m = random_map(2, h, w, rng);
    ScoreMap g = random_map(2, h, w, rng);
    Transform2D t = Transform2D::rotation_about(rng.uniform(-kPi, kPi),
                                                {rng.uniform(0, w - 1.0), rng.uniform(0, h - 1.0)});
    std::vector<int> subset;
    if (i % 3 == 1) subset = {0};
    if (i % 3 == 2) subset = {1};
    std::span<const int> sub(subset);
    double lhs = dot_maps(warp_map(m, t, sub), g);
    ScoreMap gb = warp_backward(g, t, sub);
    if (broken && i == 17) gb.data[0] += 0.5f;  // injected fault, test hook
    double rhs = dot_maps(m, gb);
    double scale = std::max(1.0, std::abs(lhs));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return {"warp_adjoint", worst <= 1e-6, "max rel err " + fmt(worst)};
}

// ---- gradient checks --------------------------------------------------------

TinyNet<double> small_net(LossKind kind, Rng& rng) {
  TinyNet<double> net;
  add_conv(net, 3, 3, 3, 4);
  add_relu(net);
  add_conv(net, 3, 3, 4, 4, 2);  // stride-2 tap
  add_relu(net);
  add_upsample2x(net);
  add_conv(net, 1, 1, 4, 3);
  if (kind == LossKind::sigmoid_xent_all) add_sigmoid_like(net);
  init_gaussian(net, 0.05, rng.next_u64());
  // nudge biases off zero so relu masks are not degenerate
  for (Layer<double>& l : net.layers) {
    if (l.kind == LayerKind::conv2d) {
      for (double& b : l.b) b = rng.uniform(-0.05, 0.05);
    }
  }
  return net;
}

struct GradCheck {
  double max_rel_err = 0.0;
  int checked = 0;
};

GradCheck finite_difference_check(TinyNet<double>& net, const Tensor<double>& x,
                                  LossSpec<double>& loss) {
  Activations<double> acts = forward(net, x);
  backward(net, acts, loss);

  // keep a copy of the analytic gradients before probing
  std::vector<std::vector<double>> gw, gb;
  for (const Layer<double>& l : net.layers) {
    gw.push_back(l.gw);
    gb.push_back(l.gb);
  }

  const double eps = 1e-3;
  GradCheck res;
  auto probe = [&](double* param, double analytic) {
    double saved = *param;
    *param = saved + eps;
    Tensor<double> dy_unused;
    double lp = loss_with_grad(loss, forward(net, x).output(), dy_unused);
    *param = saved - eps;
    double lm = loss_with_grad(loss, forward(net, x).output(), dy_unused);
    *param = saved;
    double numeric = (lp - lm) / (2.0 * eps);
    double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    res.max_rel_err = std::max(res.max_rel_err, std::abs(numeric - analytic) / denom);
    ++res.checked;
  };

  for (size_t li = 0; li < net.layers.size(); ++li) {
    Layer<double>& l = net.layers[li];
    for (size_t i = 0; i < l.w.size(); ++i) probe(&l.w[i], gw[li][i]);
    for (size_t i = 0; i < l.b.size(); ++i) probe(&l.b[i], gb[li][i]);
  }
  return res;
}

PropertyResult gradients_for(LossKind kind, const char* name, Rng& rng) {
  TinyNet<double> net = small_net(kind, rng);
  Tensor<double> x(3, 8, 8);
  for (double& v : x.v) v = rng.uniform();

  Tensor<double> target(3, 8, 8, 0.0);
  if (kind == LossKind::sigmoid_xent_all) {
    for (double& v : target.v) v = rng.uniform();
  } else {
    // one-hot partition: channel 2 acts as background
    const size_t plane = target.plane_size();
    for (size_t px = 0; px < plane; ++px) {
      int label = rng.uniform_int(0, 2);
      target.v[plane * label + px] = 1.0;
    }
  }
  std::vector<uint8_t> visible = {1, 0};  // second joint channel occluded

  LossSpec<double> loss;
  loss.kind = kind;
  loss.target = &target;
  loss.visible = &visible;
  loss.norm = LossNorm::mean_pixels;

  GradCheck res = finite_difference_check(net, x, loss);
  return {name, res.max_rel_err <= 1e-4,
          "max rel err " + fmt(res.max_rel_err) + " over " + std::to_string(res.checked) +
              " params"};
}

}  // namespace

std::vector<PropertyResult> geometry_properties(uint64_t seed, const PropertyHooks& hooks) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(point_roundtrip(rng));
  out.push_back(isometry(rng));
  out.push_back(warp_quarter_turn_exact(rng));
  out.push_back(warp_smooth_roundtrip(rng));
  out.push_back(warp_adjoint(rng, hooks.break_adjoint));
  return out;
}

std::vector<PropertyResult> gradient_properties(uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(gradients_for(LossKind::sigmoid_xent_all, "gradients_sigmoid_xent_all", rng));
  out.push_back(gradients_for(LossKind::softmax_xent_visible, "gradients_softmax_xent_visible", rng));
  return out;
}

bool all_pass(const std::vector<PropertyResult>& results) {
  for (const PropertyResult& r : results) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace posenorm
