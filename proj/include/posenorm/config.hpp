#pragma once

#include <string>

#include "posenorm/metrics.hpp"
#include "posenorm/nnet.hpp"
#include "posenorm/scoremap.hpp"
#include "posenorm/synthdata.hpp"

namespace posenorm {

/// Everything an experiment run needs, loadable from one JSON file. Unknown
/// keys are rejected so typos fail loudly; every field below is the
/// documented default.
struct RunConfig {
  PoseSamplerConfig sampler;          // includes canvas size via for_canvas
  uint64_t sampler_seed = 1;
  GroundtruthSpec groundtruth{GroundtruthSpec::Mode::gaussian, 0.15, 1.5, 1.0};
  NoiseSpec noise;
  uint64_t noise_seed = 2;

  double extract_blur_sigma = 1.5;
  ProbMap extract_mode = ProbMap::identity();

  // training
  int train_steps = 2000;
  int limb_steps = 2000;
  double lr = 0.001;
  double momentum = 0.0;
  int fine_tune_steps = 0;
  double fine_tune_lr = 0.0002;
  double init_variance = 0.001;
  LossNorm loss_norm = LossNorm::mean_pixels;
  uint64_t train_seed = 3;

  EvalConfig eval;

  double eps_pos = 1e-3;
  double theta_tol_deg = 3.0;
  bool pad_before_warp = false;

  // toy multi-scale detector
  int toy_base_channels = 16;
  std::array<int, 3> toy_phase_steps{300, 300, 600};
  double stroke_sigma = 1.0;

  static RunConfig defaults() { return {}; }
};

/// Parse a config file; missing keys keep defaults, unknown keys throw
/// ConfigError naming the offending path.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// Re-derive all component seeds from one master seed (the CLI --seed flag).
void override_seed(RunConfig& cfg, uint64_t seed);

std::string config_to_json(const RunConfig& cfg);

}  // namespace posenorm
