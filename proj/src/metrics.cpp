#include "posenorm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "posenorm/normalize.hpp"

namespace posenorm {

double reference_length(const KeypointSet& gt, const Skeleton& sk, EvalConfig::Ref mode) {
  if (mode == EvalConfig::Ref::torso) {
    return distance(gt.points[sk.joint_index("l-shoulder")], gt.points[sk.joint_index("r-hip")]);
  }
  return distance(gt.points[sk.head_index], gt.points[sk.neck_index]);
}

namespace {

void check_eval_inputs(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
                       const Skeleton& sk) {
  if (preds.empty() || gts.empty()) throw EmptyEval("no images to evaluate");
  if (preds.size() != gts.size()) throw ShapeMismatch("pred/gt count mismatch");
  for (size_t i = 0; i < preds.size(); ++i) {
    validate_keypoints(preds[i], sk);
    validate_keypoints(gts[i], sk);
  }
}

std::vector<double> per_joint_pck_at(const std::vector<KeypointSet>& preds,
                                     const std::vector<KeypointSet>& gts, const Skeleton& sk,
                                     double alpha, EvalConfig::Ref ref) {
  const int k = sk.num_joints();
  std::vector<double> correct(k, 0.0);
  for (size_t i = 0; i < preds.size(); ++i) {
    double lr = reference_length(gts[i], sk, ref);
    double thresh = alpha * lr;
    for (int j = 0; j < k; ++j) {
      if (distance(preds[i].points[j], gts[i].points[j]) <= thresh) correct[j] += 1.0;
    }
  }
  for (double& c : correct) c = 100.0 * c / static_cast<double>(preds.size());
  return correct;
}

}  // namespace

EvalReport pck(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
               const Skeleton& sk, const EvalConfig& cfg) {
  check_eval_inputs(preds, gts, sk);
  EvalReport rep;
  rep.joint_names = sk.joint_names;
  rep.per_joint_pck = per_joint_pck_at(preds, gts, sk, cfg.alpha, cfg.ref_mode);
  rep.total = 0.0;
  for (double v : rep.per_joint_pck) rep.total += v;
  rep.total /= static_cast<double>(sk.num_joints());
  rep.auc = std::nan("");
  rep.n_images = static_cast<int>(preds.size());
  return rep;
}

double auc(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
           const Skeleton& sk, const EvalConfig& cfg) {
  check_eval_inputs(preds, gts, sk);
  const int k = sk.num_joints();
  const int steps = static_cast<int>(std::floor(cfg.auc_max / cfg.auc_step + 0.5));
  double acc = 0.0;
  int n_alpha = 0;
  for (int s = 0; s <= steps; ++s) {
    double alpha = s * cfg.auc_step;
    std::vector<double> pj = per_joint_pck_at(preds, gts, sk, alpha, cfg.ref_mode);
    double total = 0.0;
    for (double v : pj) total += v;
    acc += total / k;
    ++n_alpha;
  }
  return acc / n_alpha;
}

EvalReport evaluate(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
                    const Skeleton& sk, const EvalConfig& cfg) {
  EvalReport rep = pck(preds, gts, sk, cfg);
  rep.auc = auc(preds, gts, sk, cfg);
  return rep;
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << "joint             PCK%\n";
  for (size_t j = 0; j < joint_names.size(); ++j) {
    os << joint_names[j];
    for (size_t s = joint_names[j].size(); s < 16; ++s) os << ' ';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%6.2f", per_joint_pck[j]);
    os << buf << "\n";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "total %.2f", total);
  os << buf;
  if (!std::isnan(auc)) {
    std::snprintf(buf, sizeof(buf), "  auc %.2f", auc);
    os << buf;
  }
  os << "  (n=" << n_images << ")\n";
  return os.str();
}

std::string EvalReport::to_json_string() const {
  nlohmann::json per;
  for (size_t j = 0; j < joint_names.size(); ++j) per[joint_names[j]] = per_joint_pck[j];
  nlohmann::json out{{"per_joint", per}, {"total", total}, {"n_images", n_images}};
  out["auc"] = std::isnan(auc) ? nlohmann::json() : nlohmann::json(auc);
  return out.dump(2);
}

std::vector<Vec2> relative_positions(const std::vector<KeypointSet>& corpus, const Skeleton& sk,
                                     int joint, int ref_joint, Stage stage) {
  if (corpus.empty()) throw EmptyEval("empty corpus");
  std::vector<Vec2> cloud;
  cloud.reserve(corpus.size());
  for (const KeypointSet& kp : corpus) {
    validate_keypoints(kp, sk);
    KeypointSet staged = kp;
    if (stage != Stage::raw) {
      StampedTransform body = body_transform_params(kp, sk);
      for (Vec2& p : staged.points) p = transform_point(body.t, p);
      if (stage == Stage::limb_normalized) {
        for (int l = 0; l < kNumLimbs; ++l) {
          StampedTransform limb = limb_transform_params(staged, sk, l);
          const LimbDef& d = sk.limb_defs[l];
          staged.points[d.middle] = transform_point(limb.t, staged.points[d.middle]);
          staged.points[d.end] = transform_point(limb.t, staged.points[d.end]);
        }
      }
    }
    cloud.push_back(staged.points[joint] - staged.points[ref_joint]);
  }
  return cloud;
}

Compactness compactness(const std::vector<Vec2>& cloud) {
  const size_t n = cloud.size();
  if (n < 2) throw TooFewPoints("compactness needs at least two points");
  Vec2 mean;
  for (const Vec2& p : cloud) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(n));

  double sxx = 0.0, syy = 0.0;
  std::vector<double> dist(n);
  for (size_t i = 0; i < n; ++i) {
    Vec2 d = cloud[i] - mean;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    dist[i] = d.norm();
  }
  Compactness out;
  out.cov_trace = (sxx + syy) / static_cast<double>(n - 1);
  std::sort(dist.begin(), dist.end());
  size_t rank = static_cast<size_t>(std::ceil(0.9 * static_cast<double>(n)));  // 1-based
  out.r90 = dist[rank - 1];
  return out;
}

}  // namespace posenorm
