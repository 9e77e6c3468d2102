#include "posenorm/refine.hpp"

#include <algorithm>
#include <cmath>

#include "posenorm/rng.hpp"

namespace posenorm {

template <typename T>
TinyNet<T> build_refine_net(int k, int j) {
  if (k < 1 || j < 1) throw ShapeMismatch("refine net needs k >= 1 and j >= 1");
  TinyNet<T> net;
  add_conv(net, 9, 9, k + 1, 128);
  add_relu(net);
  add_conv(net, 15, 15, 128, 128);
  add_relu(net);
  add_conv(net, 15, 15, 128, 128);
  add_relu(net);
  add_conv(net, 1, 1, 128, j);
  add_sigmoid_like(net);
  return net;
}

template TinyNet<float> build_refine_net<float>(int, int);
template TinyNet<double> build_refine_net<double>(int, int);

ScoreMap fuse_scales(const std::vector<ScoreMap>& maps, const std::vector<float>& weights,
                     const std::vector<float>& bias) {
  if (maps.empty()) throw ShapeMismatch("fuse_scales needs at least one map");
  const int c = maps[0].channels, h = maps[0].height, w = maps[0].width;
  for (const ScoreMap& m : maps) {
    if (m.channels != c || m.height != h || m.width != w) {
      throw ShapeMismatch("fuse_scales maps must share shape");
    }
  }
  const int n = static_cast<int>(maps.size());
  const int fan_in = n * c;
  if (static_cast<int>(weights.size()) != c * fan_in) {
    throw ShapeMismatch("fusion weight shape must be channels x (n_maps * channels)");
  }
  if (!bias.empty() && static_cast<int>(bias.size()) != c) {
    throw ShapeMismatch("fusion bias must have one entry per output channel");
  }

  ScoreMap out(c, h, w);
  const size_t plane = out.plane_size();
  for (int co = 0; co < c; ++co) {
    const float* wrow = weights.data() + static_cast<size_t>(co) * fan_in;
    float* op = out.plane(co);
    bool first = true;
    // accumulate only non-zero taps so a one-hot row is a bit-exact copy
    for (int m = 0; m < n; ++m) {
      for (int ci = 0; ci < c; ++ci) {
        float wv = wrow[m * c + ci];
        if (wv == 0.0f) continue;
        const float* in = maps[m].plane(ci);
        if (first) {
          for (size_t px = 0; px < plane; ++px) op[px] = wv * in[px];
          first = false;
        } else {
          for (size_t px = 0; px < plane; ++px) op[px] += wv * in[px];
        }
      }
    }
    if (first) std::fill(op, op + plane, 0.0f);
    if (!bias.empty() && bias[co] != 0.0f) {
      for (size_t px = 0; px < plane; ++px) op[px] += bias[co];
    }
  }
  return out;
}

std::vector<LossId> progressive_schedule(int phase) {
  switch (phase) {
    case 1:
      return {LossId::D1};
    case 2:
      return {LossId::D1, LossId::D2, LossId::F1};
    case 3:
      return {LossId::D1, LossId::D2, LossId::D3, LossId::F1, LossId::F2};
    default:
      throw Error("progressive_schedule phase must be 1, 2 or 3");
  }
}

TrainResult train_refinement(RefineStage stage, const std::vector<TrainSample>& corpus,
                             const TrainConfig& cfg) {
  if (corpus.empty() && cfg.steps + cfg.fine_tune_steps > 0) {
    throw EmptyEval("refinement training needs a corpus");
  }
  const int k = kNumJoints;
  const int j = stage == RefineStage::global ? k : 3;

  TrainResult res;
  res.net = build_refine_net<float>(k, j);
  init_gaussian(res.net, cfg.init_variance, cfg.seed);

  Rng pick(Rng::derive(cfg.seed, 0x7261696eULL));
  auto run_steps = [&](int steps, double lr) {
    for (int s = 0; s < steps; ++s) {
      const TrainSample& sample = corpus[pick.uniform_int(0, static_cast<int>(corpus.size()) - 1)];
      if (sample.target.c != j) throw ShapeMismatch("training target channels mismatch");
      Activations<float> acts = forward(res.net, sample.input);
      LossSpec<float> loss;
      loss.kind = LossKind::sigmoid_xent_all;
      loss.target = &sample.target;
      loss.norm = cfg.loss_norm;
      double value = backward(res.net, acts, loss);
      if (!std::isfinite(value)) {
        throw DivergenceDetected("loss became non-finite at step " +
                                 std::to_string(res.loss_curve.size()));
      }
      res.loss_curve.push_back(value);
      sgd_step(res.net, lr, cfg.momentum);
    }
  };
  run_steps(cfg.steps, cfg.lr);
  run_steps(cfg.fine_tune_steps, cfg.fine_tune_lr);
  return res;
}

// ---- multi-scale toy detector ----------------------------------------------

ToyDetector build_toy_detector(int k, int base_channels) {
  const int b = base_channels;
  ToyDetector det;
  det.k = k;
  add_conv(det.enc, 3, 3, 1, b);
  add_relu(det.enc);
  add_conv(det.enc, 3, 3, b, 2 * b, 2);
  add_relu(det.enc);
  add_conv(det.enc, 3, 3, 2 * b, 2 * b, 2);
  add_relu(det.enc);

  add_conv(det.head_s4, 1, 1, 2 * b, k + 1);
  add_conv(det.head_s2, 1, 1, 2 * b, k + 1);
  add_conv(det.head_s1, 1, 1, b, k + 1);

  add_upsample2x(det.up2);
  add_conv(det.up2, 3, 3, 2 * b, 2 * b);
  add_relu(det.up2);
  add_upsample2x(det.up1);
  add_conv(det.up1, 3, 3, 2 * b, b);
  add_relu(det.up1);

  add_conv(det.fuse1, 1, 1, 2 * (k + 1), k + 1);
  add_conv(det.fuse2, 1, 1, 2 * (k + 1), k + 1);
  return det;
}

namespace {

Tensor<float> concat_channels(const Tensor<float>& a, const Tensor<float>& b) {
  if (a.h != b.h || a.w != b.w) throw ShapeMismatch("concat needs matching spatial dims");
  Tensor<float> out(a.c + b.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + a.v.size());
  return out;
}

void split_channels(const Tensor<float>& g, int c_first, Tensor<float>& ga, Tensor<float>& gb) {
  ga = Tensor<float>(c_first, g.h, g.w);
  gb = Tensor<float>(g.c - c_first, g.h, g.w);
  std::copy(g.v.begin(), g.v.begin() + ga.v.size(), ga.v.begin());
  std::copy(g.v.begin() + ga.v.size(), g.v.end(), gb.v.begin());
}

struct ToyActivations {
  Activations<float> enc, head_s4, head_s2, head_s1, up2, up1, fuse1, fuse2;
  Tensor<float> e3, d2, d1;  // encoder output and decoder stage outputs
  Tensor<float> s4_up, f1_up;
};

ToyActivations toy_forward_full(const ToyDetector& det, const Tensor<float>& image) {
  ToyActivations acts;
  acts.enc = forward(det.enc, image);
  acts.e3 = acts.enc.output();
  acts.head_s4 = forward(det.head_s4, acts.e3);
  acts.up2 = forward(det.up2, acts.e3);
  acts.d2 = acts.up2.output();
  acts.head_s2 = forward(det.head_s2, acts.d2);
  acts.up1 = forward(det.up1, acts.d2);
  acts.d1 = acts.up1.output();
  acts.head_s1 = forward(det.head_s1, acts.d1);

  acts.s4_up = upsample2x(acts.head_s4.output());
  acts.fuse1 = forward(det.fuse1, concat_channels(acts.s4_up, acts.head_s2.output()));
  acts.f1_up = upsample2x(acts.fuse1.output());
  acts.fuse2 = forward(det.fuse2, concat_channels(acts.f1_up, acts.head_s1.output()));
  return acts;
}

}  // namespace

ToyOutputs toy_forward(const ToyDetector& det, const Tensor<float>& image) {
  ToyActivations acts = toy_forward_full(det, image);
  return {acts.head_s4.output(), acts.head_s2.output(), acts.head_s1.output(),
          acts.fuse1.output(), acts.fuse2.output()};
}

ToyDetector train_toy_detector(const std::vector<MultiScaleSample>& corpus,
                               const ToyTrainConfig& cfg) {
  if (corpus.empty()) throw EmptyEval("toy detector training needs a corpus");
  ToyDetector det = build_toy_detector(kNumJoints, cfg.base_channels);
  uint64_t ls = 1;
  for (TinyNet<float>* net : {&det.enc, &det.head_s4, &det.head_s2, &det.head_s1, &det.up2,
                              &det.up1, &det.fuse1, &det.fuse2}) {
    init_gaussian(*net, cfg.init_variance, Rng::derive(cfg.seed, ls++));
  }

  Rng pick(Rng::derive(cfg.seed, 0x746f79ULL));
  for (int phase = 1; phase <= 3; ++phase) {
    const std::vector<LossId> active = progressive_schedule(phase);
    auto on = [&](LossId id) { return std::find(active.begin(), active.end(), id) != active.end(); };

    for (int step = 0; step < cfg.phase_steps[phase - 1]; ++step) {
      const MultiScaleSample& ms = corpus[pick.uniform_int(0, static_cast<int>(corpus.size()) - 1)];
      ToyActivations acts = toy_forward_full(det, ms.image);

      for (TinyNet<float>* net : {&det.enc, &det.head_s4, &det.head_s2, &det.head_s1, &det.up2,
                                  &det.up1, &det.fuse1, &det.fuse2}) {
        zero_grads(*net);
      }

      auto scaled_loss_grad = [&](LossId id, const Tensor<float>& y, const Tensor<float>& target,
                                  Tensor<float>& dy) {
        LossSpec<float> loss;
        loss.kind = LossKind::softmax_xent_visible;
        loss.target = &target;
        loss.visible = &ms.visible;
        loss.norm = cfg.loss_norm;
        double v = loss_with_grad(loss, y, dy);
        double wgt = cfg.loss_weights[static_cast<int>(id)];
        if (wgt != 1.0) {
          for (float& g : dy.v) g = static_cast<float>(g * wgt);
        }
        if (!std::isfinite(v)) throw DivergenceDetected("toy detector loss non-finite");
        return v * wgt;
      };

      // gradients flowing into each logit head
      Tensor<float> g_s4(acts.head_s4.output().c, acts.head_s4.output().h, acts.head_s4.output().w);
      Tensor<float> g_s2(acts.head_s2.output().c, acts.head_s2.output().h, acts.head_s2.output().w);
      Tensor<float> g_s1(acts.head_s1.output().c, acts.head_s1.output().h, acts.head_s1.output().w);
      Tensor<float> dy;

      if (on(LossId::D1)) {
        scaled_loss_grad(LossId::D1, acts.head_s4.output(), ms.target_s4, dy);
        for (size_t i = 0; i < g_s4.v.size(); ++i) g_s4.v[i] += dy.v[i];
      }
      if (on(LossId::D2)) {
        scaled_loss_grad(LossId::D2, acts.head_s2.output(), ms.target_s2, dy);
        for (size_t i = 0; i < g_s2.v.size(); ++i) g_s2.v[i] += dy.v[i];
      }
      if (on(LossId::D3)) {
        scaled_loss_grad(LossId::D3, acts.head_s1.output(), ms.target_s1, dy);
        for (size_t i = 0; i < g_s1.v.size(); ++i) g_s1.v[i] += dy.v[i];
      }

      Tensor<float> g_f1(acts.fuse1.output().c, acts.fuse1.output().h, acts.fuse1.output().w);
      if (on(LossId::F2)) {
        scaled_loss_grad(LossId::F2, acts.fuse2.output(), ms.target_s1, dy);
        Tensor<float> g_concat = backprop(det.fuse2, acts.fuse2, dy, /*accumulate=*/true);
        Tensor<float> g_up, g_head;
        split_channels(g_concat, acts.f1_up.c, g_up, g_head);
        Tensor<float> g_down = upsample2x_backward(g_up);
        for (size_t i = 0; i < g_f1.v.size(); ++i) g_f1.v[i] += g_down.v[i];
        for (size_t i = 0; i < g_s1.v.size(); ++i) g_s1.v[i] += g_head.v[i];
      }
      if (on(LossId::F1)) {
        scaled_loss_grad(LossId::F1, acts.fuse1.output(), ms.target_s2, dy);
        for (size_t i = 0; i < g_f1.v.size(); ++i) g_f1.v[i] += dy.v[i];
      }
      bool f1_active = on(LossId::F1) || on(LossId::F2);
      if (f1_active) {
        Tensor<float> g_concat = backprop(det.fuse1, acts.fuse1, g_f1, /*accumulate=*/true);
        Tensor<float> g_up, g_head;
        split_channels(g_concat, acts.s4_up.c, g_up, g_head);
        Tensor<float> g_down = upsample2x_backward(g_up);
        for (size_t i = 0; i < g_s4.v.size(); ++i) g_s4.v[i] += g_down.v[i];
        for (size_t i = 0; i < g_s2.v.size(); ++i) g_s2.v[i] += g_head.v[i];
      }

      // heads into the shared trunk
      Tensor<float> g_e3(acts.e3.c, acts.e3.h, acts.e3.w);
      Tensor<float> g_d2(acts.d2.c, acts.d2.h, acts.d2.w);
      Tensor<float> g_d1(acts.d1.c, acts.d1.h, acts.d1.w);
      {
        Tensor<float> g = backprop(det.head_s4, acts.head_s4, g_s4, /*accumulate=*/true);
        for (size_t i = 0; i < g_e3.v.size(); ++i) g_e3.v[i] += g.v[i];
      }
      {
        Tensor<float> g = backprop(det.head_s2, acts.head_s2, g_s2, /*accumulate=*/true);
        for (size_t i = 0; i < g_d2.v.size(); ++i) g_d2.v[i] += g.v[i];
      }
      {
        Tensor<float> g = backprop(det.head_s1, acts.head_s1, g_s1, /*accumulate=*/true);
        for (size_t i = 0; i < g_d1.v.size(); ++i) g_d1.v[i] += g.v[i];
      }
      {
        Tensor<float> g = backprop(det.up1, acts.up1, g_d1, /*accumulate=*/true);
        for (size_t i = 0; i < g_d2.v.size(); ++i) g_d2.v[i] += g.v[i];
      }
      {
        Tensor<float> g = backprop(det.up2, acts.up2, g_d2, /*accumulate=*/true);
        for (size_t i = 0; i < g_e3.v.size(); ++i) g_e3.v[i] += g.v[i];
      }
      backprop(det.enc, acts.enc, g_e3, /*accumulate=*/true);

      for (TinyNet<float>* net : {&det.enc, &det.head_s4, &det.head_s2, &det.head_s1, &det.up2,
                                  &det.up1, &det.fuse1, &det.fuse2}) {
        sgd_step(*net, cfg.lr, cfg.momentum);
      }
    }
  }
  return det;
}

}  // namespace posenorm
