#pragma once

#include <array>
#include <string>
#include <vector>

#include "posenorm/nnet.hpp"
#include "posenorm/scoremap.hpp"
#include "posenorm/skeleton.hpp"

namespace posenorm {

/// The four-layer refinement stack: conv 9x9x(K+1)->128, two conv
/// 15x15x128->128, conv 1x1x128->J, relu between convs, sigmoid-like output.
/// Same padding throughout, so maps keep their geometry.
template <typename T>
TinyNet<T> build_refine_net(int k, int j);

/// Per-pixel 1x1-conv ensemble of same-resolution maps over their
/// concatenated channels. weights is row-major [cout x (n_maps * channels)];
/// zero weights contribute nothing, so one-hot weights are an exact
/// projection. bias may be empty (= all zero).
ScoreMap fuse_scales(const std::vector<ScoreMap>& maps, const std::vector<float>& weights,
                     const std::vector<float>& bias = {});

enum class LossId { D1, D2, D3, F1, F2 };

/// Progressive loss activation: phase 1 trains the coarse detection loss
/// only, phase 2 adds the middle scale and first fusion, phase 3 everything.
std::vector<LossId> progressive_schedule(int phase);

struct TrainSample {
  Tensor<float> input;           // K+1 channels, normalized frame
  Tensor<float> target;          // J channels, same frame
  std::vector<uint8_t> visible;  // per joint
};

struct TrainConfig {
  int steps = 2000;
  double lr = 0.001;
  double momentum = 0.0;
  double init_variance = 0.001;
  uint64_t seed = 0;
  int fine_tune_steps = 0;
  double fine_tune_lr = 0.0002;
  LossNorm loss_norm = LossNorm::mean_pixels;
};

struct TrainResult {
  TinyNet<float> net;
  std::vector<double> loss_curve;
};

enum class RefineStage { global, limb0, limb1, limb2, limb3 };

/// Gaussian-init the stage net and run single-sample SGD with the all-joints
/// sigmoid cross-entropy loss. Throws DivergenceDetected when the loss goes
/// non-finite.
TrainResult train_refinement(RefineStage stage, const std::vector<TrainSample>& corpus,
                             const TrainConfig& cfg);

// ---- multi-scale toy detector ----------------------------------------------

/// Stand-in for the multi-resolution FCN study: a small encoder-decoder that
/// emits K+1 logit maps at strides 4, 2 and 1 plus two 1x1-conv fusions,
/// trained from a one-channel stick-figure rendering.
struct ToyDetector {
  TinyNet<float> enc;                    // stride-1 then two stride-2 convs
  TinyNet<float> head_s4, head_s2, head_s1;
  TinyNet<float> up2, up1;               // decoder stages
  TinyNet<float> fuse1, fuse2;           // 1x1 over two concatenated scales
  int k = kNumJoints;
};

struct ToyOutputs {
  Tensor<float> s4, s2, s1;  // per-scale logits
  Tensor<float> f1, f2;      // fusion logits at strides 2 and 1
};

struct MultiScaleSample {
  Tensor<float> image;                       // 1 x H x W
  Tensor<float> target_s4, target_s2, target_s1;  // disk labels per scale
  std::vector<uint8_t> visible;
};

struct ToyTrainConfig {
  int base_channels = 16;
  std::array<int, 3> phase_steps{300, 300, 600};
  std::array<double, 5> loss_weights{1.0, 1.0, 1.0, 1.0, 1.0};  // D1,D2,D3,F1,F2
  double lr = 0.001;
  double momentum = 0.0;
  double init_variance = 0.001;
  uint64_t seed = 0;
  LossNorm loss_norm = LossNorm::mean_pixels;
};

ToyDetector build_toy_detector(int k, int base_channels);
ToyOutputs toy_forward(const ToyDetector& det, const Tensor<float>& image);

/// Runs the three progressive phases back to back.
ToyDetector train_toy_detector(const std::vector<MultiScaleSample>& corpus,
                               const ToyTrainConfig& cfg);

}  // namespace posenorm
