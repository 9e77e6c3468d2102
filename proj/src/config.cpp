#include "posenorm/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "posenorm/rng.hpp"

namespace posenorm {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("unknown config key: " + where + it.key());
    }
  }
}

void get_to(const json& obj, const char* key, double& out) {
  if (obj.contains(key)) out = obj.at(key).get<double>();
}
void get_to(const json& obj, const char* key, int& out) {
  if (obj.contains(key)) out = obj.at(key).get<int>();
}
void get_to(const json& obj, const char* key, bool& out) {
  if (obj.contains(key)) out = obj.at(key).get<bool>();
}
void get_to(const json& obj, const char* key, uint64_t& out) {
  if (obj.contains(key)) out = obj.at(key).get<uint64_t>();
}

void get_range(const json& obj, const char* key, AngleRange& out) {
  if (!obj.contains(key)) return;
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 2) {
    throw ConfigError(std::string("config key ") + key + " must be [lo, hi]");
  }
  out.lo = arr[0].get<double>();
  out.hi = arr[1].get<double>();
}

void parse_sampler(const json& s, RunConfig& cfg) {
  reject_unknown(s, "sampler.",
                 {"seed", "global_rotation", "arm_root", "elbow", "leg_root", "knee", "head_tilt",
                  "occlusion_prob", "margin", "bones", "bone_scale"});
  get_to(s, "seed", cfg.sampler_seed);
  get_range(s, "global_rotation", cfg.sampler.global_rotation);
  get_range(s, "arm_root", cfg.sampler.arm_root);
  get_range(s, "elbow", cfg.sampler.elbow);
  get_range(s, "leg_root", cfg.sampler.leg_root);
  get_range(s, "knee", cfg.sampler.knee);
  get_range(s, "head_tilt", cfg.sampler.head_tilt);
  get_to(s, "occlusion_prob", cfg.sampler.occlusion_prob);
  get_to(s, "margin", cfg.sampler.margin);
  if (s.contains("bones")) {
    const json& b = s.at("bones");
    reject_unknown(b, "sampler.bones.",
                   {"shoulder_half", "hip_half", "torso_half_height", "neck_rise", "head_len",
                    "upper_arm", "forearm", "thigh", "shin"});
    BoneConfig& bc = cfg.sampler.bones;
    get_to(b, "shoulder_half", bc.shoulder_half);
    get_to(b, "hip_half", bc.hip_half);
    get_to(b, "torso_half_height", bc.torso_half_height);
    get_to(b, "neck_rise", bc.neck_rise);
    get_to(b, "head_len", bc.head_len);
    get_to(b, "upper_arm", bc.upper_arm);
    get_to(b, "forearm", bc.forearm);
    get_to(b, "thigh", bc.thigh);
    get_to(b, "shin", bc.shin);
  }
  if (s.contains("bone_scale")) {
    cfg.sampler.bones = cfg.sampler.bones.scaled(s.at("bone_scale").get<double>());
  }
}

RunConfig parse_document(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(doc, "",
                 {"canvas", "sampler", "groundtruth", "noise", "extract", "train", "eval",
                  "normalize", "toy"});

  RunConfig cfg;
  int canvas_h = 64, canvas_w = 64;
  if (doc.contains("canvas")) {
    const json& c = doc.at("canvas");
    reject_unknown(c, "canvas.", {"height", "width"});
    get_to(c, "height", canvas_h);
    get_to(c, "width", canvas_w);
  }
  cfg.sampler = PoseSamplerConfig::for_canvas(canvas_h, canvas_w);

  if (doc.contains("sampler")) parse_sampler(doc.at("sampler"), cfg);

  if (doc.contains("groundtruth")) {
    const json& g = doc.at("groundtruth");
    reject_unknown(g, "groundtruth.", {"mode", "radius_factor", "gauss_sigma", "min_radius"});
    if (g.contains("mode")) {
      std::string mode = g.at("mode").get<std::string>();
      if (mode == "disk") {
        cfg.groundtruth.mode = GroundtruthSpec::Mode::disk;
      } else if (mode == "gaussian") {
        cfg.groundtruth.mode = GroundtruthSpec::Mode::gaussian;
      } else {
        throw ConfigError("groundtruth.mode must be disk or gaussian");
      }
    }
    get_to(g, "radius_factor", cfg.groundtruth.radius_factor);
    get_to(g, "gauss_sigma", cfg.groundtruth.gauss_sigma);
    get_to(g, "min_radius", cfg.groundtruth.min_radius);
    if (cfg.groundtruth.radius_factor <= 0.0 || cfg.groundtruth.gauss_sigma <= 0.0) {
      throw ConfigError("groundtruth radius_factor and gauss_sigma must be positive");
    }
  }

  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    reject_unknown(n, "noise.",
                   {"seed", "jitter_sigma", "amplitude_noise", "false_peak_prob",
                    "false_peak_gain"});
    get_to(n, "seed", cfg.noise_seed);
    get_to(n, "jitter_sigma", cfg.noise.jitter_sigma);
    get_to(n, "amplitude_noise", cfg.noise.amplitude_noise);
    get_to(n, "false_peak_prob", cfg.noise.false_peak_prob);
    get_to(n, "false_peak_gain", cfg.noise.false_peak_gain);
    if (cfg.noise.false_peak_prob < 0.0 || cfg.noise.false_peak_prob > 1.0) {
      throw ConfigError("noise.false_peak_prob must be a probability");
    }
  }

  if (doc.contains("extract")) {
    const json& e = doc.at("extract");
    reject_unknown(e, "extract.", {"blur_sigma", "mode", "sigmoid_w", "sigmoid_b"});
    get_to(e, "blur_sigma", cfg.extract_blur_sigma);
    if (e.contains("mode")) {
      std::string mode = e.at("mode").get<std::string>();
      if (mode == "identity") {
        cfg.extract_mode.mode = ProbMode::identity;
      } else if (mode == "softmax") {
        cfg.extract_mode.mode = ProbMode::softmax;
      } else if (mode == "sigmoid_like") {
        cfg.extract_mode.mode = ProbMode::sigmoid_like;
      } else {
        throw ConfigError("extract.mode must be identity, softmax or sigmoid_like");
      }
    }
    get_to(e, "sigmoid_w", cfg.extract_mode.w);
    get_to(e, "sigmoid_b", cfg.extract_mode.b);
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown(t, "train.",
                   {"seed", "steps", "limb_steps", "lr", "momentum", "fine_tune_steps",
                    "fine_tune_lr", "init_variance", "loss_normalization"});
    get_to(t, "seed", cfg.train_seed);
    get_to(t, "steps", cfg.train_steps);
    get_to(t, "limb_steps", cfg.limb_steps);
    get_to(t, "lr", cfg.lr);
    get_to(t, "momentum", cfg.momentum);
    get_to(t, "fine_tune_steps", cfg.fine_tune_steps);
    get_to(t, "fine_tune_lr", cfg.fine_tune_lr);
    get_to(t, "init_variance", cfg.init_variance);
    if (t.contains("loss_normalization")) {
      std::string n = t.at("loss_normalization").get<std::string>();
      if (n == "sum") {
        cfg.loss_norm = LossNorm::sum;
      } else if (n == "mean_pixels") {
        cfg.loss_norm = LossNorm::mean_pixels;
      } else if (n == "mean_all") {
        cfg.loss_norm = LossNorm::mean_all;
      } else {
        throw ConfigError("train.loss_normalization must be sum, mean_pixels or mean_all");
      }
    }
  }

  if (doc.contains("eval")) {
    const json& e = doc.at("eval");
    reject_unknown(e, "eval.", {"alpha", "ref_mode", "auc_max", "auc_step"});
    get_to(e, "alpha", cfg.eval.alpha);
    if (e.contains("ref_mode")) {
      std::string m = e.at("ref_mode").get<std::string>();
      if (m == "torso") {
        cfg.eval.ref_mode = EvalConfig::Ref::torso;
      } else if (m == "head") {
        cfg.eval.ref_mode = EvalConfig::Ref::head;
      } else {
        throw ConfigError("eval.ref_mode must be torso or head");
      }
    }
    get_to(e, "auc_max", cfg.eval.auc_max);
    get_to(e, "auc_step", cfg.eval.auc_step);
    if (cfg.eval.alpha <= 0.0 || cfg.eval.auc_step <= 0.0) {
      throw ConfigError("eval.alpha and eval.auc_step must be positive");
    }
  }

  if (doc.contains("normalize")) {
    const json& n = doc.at("normalize");
    reject_unknown(n, "normalize.", {"eps_pos", "theta_tol_deg", "pad_before_warp"});
    get_to(n, "eps_pos", cfg.eps_pos);
    get_to(n, "theta_tol_deg", cfg.theta_tol_deg);
    get_to(n, "pad_before_warp", cfg.pad_before_warp);
  }

  if (doc.contains("toy")) {
    const json& t = doc.at("toy");
    reject_unknown(t, "toy.", {"base_channels", "phase_steps", "stroke_sigma"});
    get_to(t, "base_channels", cfg.toy_base_channels);
    if (t.contains("phase_steps")) {
      const auto& arr = t.at("phase_steps");
      if (!arr.is_array() || arr.size() != 3) throw ConfigError("toy.phase_steps must be [a,b,c]");
      for (int i = 0; i < 3; ++i) cfg.toy_phase_steps[i] = arr[i].get<int>();
    }
    get_to(t, "stroke_sigma", cfg.stroke_sigma);
  }
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_document(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

void override_seed(RunConfig& cfg, uint64_t seed) {
  cfg.sampler_seed = Rng::derive(seed, 1);
  cfg.noise_seed = Rng::derive(seed, 2);
  cfg.train_seed = Rng::derive(seed, 3);
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["canvas"] = {{"height", cfg.sampler.canvas_h}, {"width", cfg.sampler.canvas_w}};
  doc["sampler"] = {
      {"seed", cfg.sampler_seed},
      {"global_rotation", {cfg.sampler.global_rotation.lo, cfg.sampler.global_rotation.hi}},
      {"arm_root", {cfg.sampler.arm_root.lo, cfg.sampler.arm_root.hi}},
      {"elbow", {cfg.sampler.elbow.lo, cfg.sampler.elbow.hi}},
      {"leg_root", {cfg.sampler.leg_root.lo, cfg.sampler.leg_root.hi}},
      {"knee", {cfg.sampler.knee.lo, cfg.sampler.knee.hi}},
      {"head_tilt", {cfg.sampler.head_tilt.lo, cfg.sampler.head_tilt.hi}},
      {"occlusion_prob", cfg.sampler.occlusion_prob},
      {"margin", cfg.sampler.margin},
      {"bones",
       {{"shoulder_half", cfg.sampler.bones.shoulder_half},
        {"hip_half", cfg.sampler.bones.hip_half},
        {"torso_half_height", cfg.sampler.bones.torso_half_height},
        {"neck_rise", cfg.sampler.bones.neck_rise},
        {"head_len", cfg.sampler.bones.head_len},
        {"upper_arm", cfg.sampler.bones.upper_arm},
        {"forearm", cfg.sampler.bones.forearm},
        {"thigh", cfg.sampler.bones.thigh},
        {"shin", cfg.sampler.bones.shin}}}};
  doc["groundtruth"] = {
      {"mode", cfg.groundtruth.mode == GroundtruthSpec::Mode::disk ? "disk" : "gaussian"},
      {"radius_factor", cfg.groundtruth.radius_factor},
      {"gauss_sigma", cfg.groundtruth.gauss_sigma},
      {"min_radius", cfg.groundtruth.min_radius}};
  doc["noise"] = {{"seed", cfg.noise_seed},
                  {"jitter_sigma", cfg.noise.jitter_sigma},
                  {"amplitude_noise", cfg.noise.amplitude_noise},
                  {"false_peak_prob", cfg.noise.false_peak_prob},
                  {"false_peak_gain", cfg.noise.false_peak_gain}};
  const char* mode = cfg.extract_mode.mode == ProbMode::identity
                         ? "identity"
                         : cfg.extract_mode.mode == ProbMode::softmax ? "softmax" : "sigmoid_like";
  doc["extract"] = {{"blur_sigma", cfg.extract_blur_sigma},
                    {"mode", mode},
                    {"sigmoid_w", cfg.extract_mode.w},
                    {"sigmoid_b", cfg.extract_mode.b}};
  const char* norm = cfg.loss_norm == LossNorm::sum
                         ? "sum"
                         : cfg.loss_norm == LossNorm::mean_pixels ? "mean_pixels" : "mean_all";
  doc["train"] = {{"seed", cfg.train_seed},
                  {"steps", cfg.train_steps},
                  {"limb_steps", cfg.limb_steps},
                  {"lr", cfg.lr},
                  {"momentum", cfg.momentum},
                  {"fine_tune_steps", cfg.fine_tune_steps},
                  {"fine_tune_lr", cfg.fine_tune_lr},
                  {"init_variance", cfg.init_variance},
                  {"loss_normalization", norm}};
  doc["eval"] = {{"alpha", cfg.eval.alpha},
                 {"ref_mode", cfg.eval.ref_mode == EvalConfig::Ref::torso ? "torso" : "head"},
                 {"auc_max", cfg.eval.auc_max},
                 {"auc_step", cfg.eval.auc_step}};
  doc["normalize"] = {{"eps_pos", cfg.eps_pos},
                      {"theta_tol_deg", cfg.theta_tol_deg},
                      {"pad_before_warp", cfg.pad_before_warp}};
  doc["toy"] = {{"base_channels", cfg.toy_base_channels},
                {"phase_steps", cfg.toy_phase_steps},
                {"stroke_sigma", cfg.stroke_sigma}};
  return doc.dump(2);
}

}  // namespace posenorm
