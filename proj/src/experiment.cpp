#include "posenorm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <thread>

namespace posenorm {

SynthOutput synthesize(const RunConfig& cfg, int n, bool with_maps) {
  const Skeleton& sk = canonical_skeleton();
  SynthOutput out;
  Rng sampler_rng(cfg.sampler_seed);
  Rng noise_rng(cfg.noise_seed);
  for (int i = 0; i < n; ++i) {
    Annotation ann;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", i);
    ann.id = std::string("img") + buf;
    ann.width = cfg.sampler.canvas_w;
    ann.height = cfg.sampler.canvas_h;
    ann.kp = sample_pose(cfg.sampler, sampler_rng);
    if (with_maps) {
      ScoreMap gt = make_groundtruth(ann.kp, sk, cfg.groundtruth, ann.height, ann.width);
      out.detector_maps.push_back(
          simulate_detector(gt, cfg.noise, cfg.groundtruth.gauss_sigma, noise_rng));
    }
    out.corpus.push_back(std::move(ann));
  }
  return out;
}

ScoreMap groundtruth_for(const RunConfig& cfg, const Annotation& ann) {
  return make_groundtruth(ann.kp, canonical_skeleton(), cfg.groundtruth, ann.height, ann.width);
}

PipelineConfig make_pipeline_config(const RunConfig& cfg, bool normalize) {
  PipelineConfig pc;
  pc.extract_blur_sigma = cfg.extract_blur_sigma;
  pc.extract_mode = cfg.extract_mode;
  pc.eps_pos = cfg.eps_pos;
  pc.normalize = normalize;
  return pc;
}

namespace {

Tensor<float> joints_only_tensor(const ScoreMap& m, int k) {
  Tensor<float> t(k, m.height, m.width);
  std::copy_n(m.data.begin(), t.v.size(), t.v.begin());
  return t;
}

std::vector<uint8_t> visibility_of(const KeypointSet& kp) {
  std::vector<uint8_t> v(kp.visible.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = kp.visible[i] ? 1 : 0;
  return v;
}

}  // namespace

std::vector<TrainSample> global_training_set(const RunConfig& cfg,
                                             const std::vector<CorpusEntry>& entries,
                                             bool normalize) {
  const Skeleton& sk = canonical_skeleton();
  std::vector<TrainSample> set;
  set.reserve(entries.size());
  for (const CorpusEntry& e : entries) {
    if (e.smap_path.empty()) throw IoError("corpus entry has no detector maps: " + e.ann.id);
    ScoreMap det = read_smap(e.smap_path);
    ScoreMap gt = groundtruth_for(cfg, e.ann);

    TrainSample s;
    if (normalize) {
      KeypointSet kp = extract_positions(det, sk, cfg.extract_blur_sigma, cfg.extract_mode);
      StampedTransform body = body_transform_params(kp, sk, cfg.eps_pos);
      if (body.flag == TransformFlag::applied) {
        det = body_normalize(det, body.t);
        gt = body_normalize(gt, body.t);
      }
    }
    s.input = Tensor<float>::from_scoremap(det);
    s.target = joints_only_tensor(gt, sk.num_joints());
    s.visible = visibility_of(e.ann.kp);
    set.push_back(std::move(s));
  }
  return set;
}

std::vector<TrainSample> limb_training_set(const RunConfig& cfg,
                                           const std::vector<CorpusEntry>& entries,
                                           const TinyNet<float>& global_net, int limb_index,
                                           bool normalize) {
  const Skeleton& sk = canonical_skeleton();
  const LimbDef& limb = sk.limb_defs[limb_index];
  PipelineConfig pc = make_pipeline_config(cfg, normalize);
  RefineNets nets;
  nets.global = &global_net;

  std::vector<TrainSample> set;
  set.reserve(entries.size());
  for (const CorpusEntry& e : entries) {
    if (e.smap_path.empty()) throw IoError("corpus entry has no detector maps: " + e.ann.id);
    ScoreMap det = read_smap(e.smap_path);
    PipelineResult pr = run_pipeline(det, sk, pc, nets);

    ScoreMap gt = groundtruth_for(cfg, e.ann);
    if (pr.record.body.flag == TransformFlag::applied) gt = body_normalize(gt, pr.record.body.t);

    StampedTransform lt = pr.record.limbs[limb_index];
    ScoreMap input = pr.stage2_input;
    if (normalize && lt.flag == TransformFlag::applied) {
      input = limb_normalize(input, sk, limb_index, lt.t);
      gt = limb_normalize(gt, sk, limb_index, lt.t);
    }

    TrainSample s;
    s.input = Tensor<float>::from_scoremap(input);
    s.target = Tensor<float>(3, gt.height, gt.width);
    const int ch[3] = {limb.root, limb.middle, limb.end};
    for (int i = 0; i < 3; ++i) {
      std::copy_n(gt.plane(ch[i]), gt.plane_size(), s.target.plane(i));
    }
    s.visible = visibility_of(e.ann.kp);
    set.push_back(std::move(s));
  }
  return set;
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

EvalRows evaluate_entries(const RunConfig& cfg, const std::vector<CorpusEntry>& entries,
                          const RefineNets& nets, bool normalize, int threads) {
  if (entries.empty()) throw EmptyEval("no corpus entries to evaluate");
  const Skeleton& sk = canonical_skeleton();
  PipelineConfig pc = make_pipeline_config(cfg, normalize);

  const int n = static_cast<int>(entries.size());
  std::vector<KeypointSet> gt(n), det(n), stage1(n), stage2(n);
  parallel_for(n, threads, [&](int i) {
    ScoreMap maps = read_smap(entries[i].smap_path);
    PipelineResult pr = run_pipeline(maps, sk, pc, nets);
    gt[i] = entries[i].ann.kp;
    det[i] = pr.detector_keypoints;
    stage1[i] = pr.stage1_keypoints;
    stage2[i] = pr.final_keypoints;
  });

  EvalRows rows;
  rows.detector = evaluate(det, gt, sk, cfg.eval);
  if (nets.global != nullptr) rows.stage1 = evaluate(stage1, gt, sk, cfg.eval);
  bool any_limb = false;
  for (const auto* l : nets.limbs) any_limb = any_limb || l != nullptr;
  if (any_limb) rows.stage2 = evaluate(stage2, gt, sk, cfg.eval);
  return rows;
}

int configured_threads() {
  const char* env = std::getenv("POSENORM_THREADS");
  if (env != nullptr) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace posenorm
