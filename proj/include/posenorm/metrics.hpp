#pragma once

#include <string>
#include <vector>

#include "posenorm/skeleton.hpp"

namespace posenorm {

struct EvalConfig {
  enum class Ref { torso, head };
  double alpha = 0.2;
  Ref ref_mode = Ref::torso;
  double auc_max = 0.5;
  double auc_step = 0.01;
};

struct EvalReport {
  std::vector<std::string> joint_names;
  std::vector<double> per_joint_pck;  // percent
  double total = 0.0;                 // unweighted mean over joints, percent
  double auc = 0.0;                   // percent; NaN until filled
  int n_images = 0;

  std::string to_table() const;
  std::string to_json_string() const;
};

/// Reference length per image: torso mode is the l-shoulder to r-hip
/// distance, head mode the head-top to neck distance. Ground truth only.
double reference_length(const KeypointSet& gt, const Skeleton& sk, EvalConfig::Ref mode);

/// A joint is correct when its prediction lies within alpha * reference
/// length of the ground truth (inclusive).
EvalReport pck(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
               const Skeleton& sk, const EvalConfig& cfg);

/// Mean of total PCK over alpha in {0, step, ..., max}, percent.
double auc(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
           const Skeleton& sk, const EvalConfig& cfg);

/// pck + auc in one report.
EvalReport evaluate(const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
                    const Skeleton& sk, const EvalConfig& cfg);

enum class Stage { raw, body_normalized, limb_normalized };

/// Per-sample relative position of one joint to a reference joint after
/// applying the stage's transforms to the annotated points. Transforms are
/// computed from the annotations themselves.
std::vector<Vec2> relative_positions(const std::vector<KeypointSet>& corpus, const Skeleton& sk,
                                     int joint, int ref_joint, Stage stage);

struct Compactness {
  double cov_trace = 0.0;  // trace of the 2x2 sample covariance, px^2
  double r90 = 0.0;        // nearest-rank 90th percentile distance to centroid, px
};

Compactness compactness(const std::vector<Vec2>& cloud);

}  // namespace posenorm
