#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posenorm/rng.hpp"
#include "posenorm/scoremap.hpp"
#include "posenorm/skeleton.hpp"

namespace posenorm {

/// Segment lengths of the articulated stick figure, px. Defaults are sized
/// for a 64x64 canvas; scaled_for() shrinks them proportionally.
struct BoneConfig {
  double shoulder_half = 7.0;
  double hip_half = 5.0;
  double torso_half_height = 9.0;
  double neck_rise = 11.0;  // torso center to neck
  double head_len = 5.0;    // neck to head-top
  double upper_arm = 8.0;
  double forearm = 7.0;
  double thigh = 9.0;
  double shin = 8.0;

  BoneConfig scaled(double s) const;
};

struct AngleRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct PoseSamplerConfig {
  int canvas_h = 64;
  int canvas_w = 64;
  BoneConfig bones;
  AngleRange global_rotation{-kPi, kPi};
  AngleRange arm_root{-2.2, 2.2};
  AngleRange elbow{-1.6, 1.6};
  AngleRange leg_root{-0.8, 0.8};
  AngleRange knee{-1.2, 1.2};
  AngleRange head_tilt{-0.4, 0.4};
  double occlusion_prob = 0.1;
  double margin = 1.0;  // keep joints this far inside the canvas

  /// Defaults with bones scaled to a canvas size.
  static PoseSamplerConfig for_canvas(int h, int w);
};

/// Kinematic-tree sample: torso at the canvas center under a drawn global
/// rotation, limbs articulated per the configured ranges. Joints are kept
/// inside the canvas by resampling (up to 100 draws) and finally by scaling
/// the pose down about its center.
KeypointSet sample_pose(const PoseSamplerConfig& cfg, Rng& rng);

/// Detector error model applied to gaussian ground-truth maps: per-joint peak
/// jitter, amplitude scaling, and occasional spurious peaks.
struct NoiseSpec {
  double jitter_sigma = 0.0;     // px, per axis
  double amplitude_noise = 0.0;  // peak scale drawn from 1 +/- this
  double false_peak_prob = 0.0;
  double false_peak_gain = 1.5;  // spurious peak height relative to the true one
};

ScoreMap simulate_detector(const ScoreMap& gt, const NoiseSpec& spec, double gauss_sigma,
                           Rng& rng);

struct AugmentParams {
  enum class Mode { lsp, mpii };  // lsp: full 360 rotation; mpii: +/- 30 degrees
  Mode mode = Mode::lsp;
  bool scale = true;
  bool flip = true;
  bool rotate = true;
};

struct Augmented {
  KeypointSet kp;
  std::optional<ScoreMap> map;
  double scale = 1.0;
  bool flipped = false;
  double rotation = 0.0;
};

/// Random scale about the canvas center, horizontal flip with left/right
/// label (and channel) swap, and rotation. The identical transform is applied
/// to the keypoints and, when given, the map.
Augmented augment(const KeypointSet& kp, const ScoreMap* map, int canvas_h, int canvas_w,
                  const AugmentParams& params, Rng& rng);

/// One-channel stick-figure rendering of a pose: per pixel the strongest
/// Gaussian profile over the skeleton's bone segments. Serves as the toy
/// detector's input image.
ScoreMap render_stick_figure(const KeypointSet& kp, const Skeleton& sk, int h, int w,
                             double stroke_sigma);

struct Annotation {
  std::string id;
  int width = 0;
  int height = 0;
  KeypointSet kp;
};

using Corpus = std::vector<Annotation>;

/// Annotation JSON: an array of {id, width, height, joints:[{name,x,y,visible} x14]}
/// in canonical joint order.
void write_annotations(const std::string& path, const Corpus& corpus);
Corpus read_annotations(const std::string& path);

/// Corpus directory layout: index.json listing ids, then per image
/// "<id>.json" (annotation) and "<id>.smap" (simulated detector maps).
struct CorpusEntry {
  Annotation ann;
  std::string smap_path;  // empty when the corpus was written without maps
};

void write_corpus_dir(const std::string& dir, const Corpus& corpus,
                      const std::vector<ScoreMap>* detector_maps);
std::vector<CorpusEntry> read_corpus_dir(const std::string& dir);

}  // namespace posenorm
