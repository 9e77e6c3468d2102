// posenorm command-line front end: corpus synthesis, stage training,
// evaluation, compactness statistics, and the property-suite gate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posenorm/config.hpp"
#include "posenorm/experiment.hpp"
#include "posenorm/metrics.hpp"
#include "posenorm/properties.hpp"

namespace fs = std::filesystem;
using namespace posenorm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitProperty = 4;

struct GlobalArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
};

RunConfig load_run_config(const GlobalArgs& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig::defaults() : load_config(g.config_path);
  if (g.seed) override_seed(cfg, *g.seed);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for write: " + path);
  f << text;
  if (!f) throw IoError("short write: " + path);
}

int cmd_synth(const GlobalArgs& g, const std::string& out_dir, int n, bool annotations_only) {
  RunConfig cfg = load_run_config(g);
  SynthOutput synth = synthesize(cfg, n, !annotations_only);
  write_corpus_dir(out_dir, synth.corpus, annotations_only ? nullptr : &synth.detector_maps);
  write_text((fs::path(out_dir) / "config.json").string(), config_to_json(cfg));
  std::cout << "wrote " << n << " samples to " << out_dir << "\n";
  return kExitOk;
}

RefineStage parse_stage(const std::string& s) {
  if (s == "global") return RefineStage::global;
  if (s == "limb0") return RefineStage::limb0;
  if (s == "limb1") return RefineStage::limb1;
  if (s == "limb2") return RefineStage::limb2;
  if (s == "limb3") return RefineStage::limb3;
  throw ConfigError("unknown stage: " + s + " (want global or limb0..limb3)");
}

int cmd_train(const GlobalArgs& g, const std::string& corpus_dir, const std::string& out_ckpt,
              const std::string& stage_name, const std::string& global_ckpt, bool no_normalize,
              int steps_override) {
  RunConfig cfg = load_run_config(g);
  RefineStage stage = parse_stage(stage_name);
  std::vector<CorpusEntry> entries = read_corpus_dir(corpus_dir);

  TrainConfig tc;
  tc.lr = cfg.lr;
  tc.momentum = cfg.momentum;
  tc.init_variance = cfg.init_variance;
  tc.seed = cfg.train_seed;
  tc.fine_tune_steps = cfg.fine_tune_steps;
  tc.fine_tune_lr = cfg.fine_tune_lr;
  tc.loss_norm = cfg.loss_norm;
  tc.steps = stage == RefineStage::global ? cfg.train_steps : cfg.limb_steps;
  if (steps_override >= 0) tc.steps = steps_override;

  std::vector<TrainSample> set;
  if (stage == RefineStage::global) {
    set = global_training_set(cfg, entries, !no_normalize);
  } else {
    if (global_ckpt.empty()) {
      throw ConfigError("limb stages need --global-ckpt from a finished stage-1 run");
    }
    TinyNet<float> global_net = load_tnet<float>(global_ckpt);
    int limb = static_cast<int>(stage) - static_cast<int>(RefineStage::limb0);
    tc.seed = Rng::derive(cfg.train_seed, 100 + limb);
    set = limb_training_set(cfg, entries, global_net, limb, !no_normalize);
  }

  std::string loss_path = out_ckpt + ".loss.json";
  try {
    TrainResult res = train_refinement(stage, set, tc);
    save_tnet(out_ckpt, res.net);
    write_text(loss_path, nlohmann::json(res.loss_curve).dump());
    double first = res.loss_curve.empty() ? 0.0 : res.loss_curve.front();
    double last = res.loss_curve.empty() ? 0.0 : res.loss_curve.back();
    std::printf("trained %s for %zu steps, loss %.5f -> %.5f, checkpoint %s\n",
                stage_name.c_str(), res.loss_curve.size(), first, last, out_ckpt.c_str());
  } catch (const DivergenceDetected& e) {
    write_text(loss_path, "[]");
    std::cerr << "error: " << e.what() << " (loss trace: " << loss_path << ")\n";
    return 1;
  }
  return kExitOk;
}

int cmd_eval(const GlobalArgs& g, const std::string& corpus_dir, const std::string& global_ckpt,
             const std::vector<std::string>& limb_ckpts, bool no_normalize,
             const std::string& out_path) {
  RunConfig cfg = load_run_config(g);
  std::vector<CorpusEntry> entries = read_corpus_dir(corpus_dir);

  std::optional<TinyNet<float>> global_net;
  if (!global_ckpt.empty()) global_net = load_tnet<float>(global_ckpt);
  std::array<std::optional<TinyNet<float>>, 4> limb_nets;
  if (!limb_ckpts.empty()) {
    if (limb_ckpts.size() != 4) throw ConfigError("--limb-ckpts wants exactly four paths");
    for (int l = 0; l < 4; ++l) limb_nets[l] = load_tnet<float>(limb_ckpts[l]);
  }
  RefineNets nets;
  if (global_net) nets.global = &*global_net;
  for (int l = 0; l < 4; ++l) {
    if (limb_nets[l]) nets.limbs[l] = &*limb_nets[l];
  }

  EvalRows rows = evaluate_entries(cfg, entries, nets, !no_normalize, configured_threads());

  nlohmann::json doc;
  doc["detector"] = nlohmann::json::parse(rows.detector.to_json_string());
  std::cout << "== detector only ==\n" << rows.detector.to_table();
  if (rows.stage1) {
    doc["stage1"] = nlohmann::json::parse(rows.stage1->to_json_string());
    std::cout << "== stage 1 ==\n" << rows.stage1->to_table();
  }
  if (rows.stage2) {
    doc["stage2"] = nlohmann::json::parse(rows.stage2->to_json_string());
    std::cout << "== stage 2 ==\n" << rows.stage2->to_table();
  }
  doc["normalized"] = !no_normalize;
  doc["n_images"] = static_cast<int>(entries.size());
  if (!out_path.empty()) write_text(out_path, doc.dump(2) + "\n");
  return kExitOk;
}

Stage parse_point_stage(const std::string& s) {
  if (s == "raw") return Stage::raw;
  if (s == "body_normalized") return Stage::body_normalized;
  if (s == "limb_normalized") return Stage::limb_normalized;
  throw ConfigError("unknown stage: " + s + " (want raw, body_normalized or limb_normalized)");
}

int cmd_compactness(const GlobalArgs& g, const std::string& corpus_dir, const std::string& joint,
                    const std::string& ref, const std::string& stage_name,
                    const std::string& out_path, const std::string& csv_path) {
  RunConfig cfg = load_run_config(g);
  (void)cfg;
  const Skeleton& sk = canonical_skeleton();
  int j = sk.joint_index(joint);
  int r = sk.joint_index(ref);
  if (j < 0 || r < 0) throw ConfigError("unknown joint name: " + (j < 0 ? joint : ref));

  std::vector<CorpusEntry> entries = read_corpus_dir(corpus_dir);
  std::vector<KeypointSet> kps;
  for (const CorpusEntry& e : entries) kps.push_back(e.ann.kp);

  std::vector<Vec2> cloud = relative_positions(kps, sk, j, r, parse_point_stage(stage_name));
  Compactness c = compactness(cloud);

  nlohmann::json doc{{"joint", joint},       {"ref", ref},       {"stage", stage_name},
                     {"cov_trace", c.cov_trace}, {"r90", c.r90}, {"n", cloud.size()}};
  std::cout << doc.dump(2) << "\n";
  if (!out_path.empty()) write_text(out_path, doc.dump(2) + "\n");
  if (!csv_path.empty()) {
    std::string csv = "dx,dy\n";
    char buf[64];
    for (const Vec2& p : cloud) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.x, p.y);
      csv += buf;
    }
    write_text(csv_path, csv);
  }
  return kExitOk;
}

int cmd_roundtrip(const GlobalArgs& g) {
  uint64_t seed = g.seed.value_or(20240901ULL);
  PropertyHooks hooks;
  hooks.break_adjoint = std::getenv("POSENORM_TEST_BREAK_ADJOINT") != nullptr;

  std::vector<PropertyResult> results = geometry_properties(seed, hooks);
  std::vector<PropertyResult> grads = gradient_properties(seed + 1);
  results.insert(results.end(), grads.begin(), grads.end());

  bool ok = true;
  for (const PropertyResult& r : results) {
    std::printf("%s  %-32s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? kExitOk : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pose-normalization score-map toolkit"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  uint64_t seed_raw = 0;
  bool seed_set = false;
  app.add_option("--seed", seed_raw, "master seed; re-derives all component seeds")
      ->each([&](const std::string&) { seed_set = true; });

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string out_dir;
  int n = 100;
  bool annotations_only = false;
  synth->add_option("--out", out_dir, "output corpus directory")->required();
  synth->add_option("--n", n, "number of samples");
  synth->add_flag("--annotations-only", annotations_only, "skip detector score maps");

  auto* train = app.add_subcommand("train", "train a refinement stage");
  std::string corpus_dir, out_ckpt, stage_name = "global", global_ckpt;
  bool no_normalize = false;
  int steps_override = -1;
  train->add_option("--corpus", corpus_dir, "corpus directory")->required();
  train->add_option("--out", out_ckpt, "output checkpoint (TNET1)")->required();
  train->add_option("--stage", stage_name, "global or limb0..limb3");
  train->add_option("--global-ckpt", global_ckpt, "stage-1 checkpoint (limb stages)");
  train->add_flag("--no-normalize", no_normalize, "train on un-normalized maps");
  train->add_option("--steps", steps_override, "override configured step count");

  auto* eval = app.add_subcommand("eval", "evaluate pipeline stages on a corpus");
  std::string eval_corpus, eval_global, eval_out;
  std::vector<std::string> eval_limbs;
  bool eval_no_normalize = false;
  eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
  eval->add_option("--global-ckpt", eval_global, "stage-1 checkpoint");
  eval->add_option("--limb-ckpts", eval_limbs, "four stage-2 checkpoints")->expected(4);
  eval->add_flag("--no-normalize", eval_no_normalize, "run with identity transforms");
  eval->add_option("--out", eval_out, "write the JSON report here");

  auto* compact = app.add_subcommand("compactness", "relative-position statistics");
  std::string c_corpus, c_joint = "l-wrist", c_ref = "l-shoulder", c_stage = "raw", c_out, c_csv;
  compact->add_option("--corpus", c_corpus, "corpus directory")->required();
  compact->add_option("--joint", c_joint, "joint name");
  compact->add_option("--ref", c_ref, "reference joint name");
  compact->add_option("--stage", c_stage, "raw, body_normalized or limb_normalized");
  compact->add_option("--out", c_out, "write stats JSON here");
  compact->add_option("--csv", c_csv, "write the point cloud here");

  auto* roundtrip = app.add_subcommand("roundtrip", "run the property suites");

  CLI11_PARSE(app, argc, argv);
  if (seed_set) g.seed = seed_raw;

  try {
    if (synth->parsed()) return cmd_synth(g, out_dir, n, annotations_only);
    if (train->parsed()) {
      return cmd_train(g, corpus_dir, out_ckpt, stage_name, global_ckpt, no_normalize,
                       steps_override);
    }
    if (eval->parsed()) {
      return cmd_eval(g, eval_corpus, eval_global, eval_limbs, eval_no_normalize, eval_out);
    }
    if (compact->parsed()) {
      return cmd_compactness(g, c_corpus, c_joint, c_ref, c_stage, c_out, c_csv);
    }
    if (roundtrip->parsed()) return cmd_roundtrip(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaMismatch& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const TooFewPoints& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const EmptyEval& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
