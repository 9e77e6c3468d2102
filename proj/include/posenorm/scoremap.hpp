#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "posenorm/skeleton.hpp"

namespace posenorm {

/// Stack of per-joint confidence maps plus one background channel; the
/// currency every pipeline stage consumes and produces. Channel-major,
/// row-major within a channel. Values are float32, matching the SMAP1 file
/// format bit for bit.
struct ScoreMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  ScoreMap() = default;
  ScoreMap(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, fill) {}

  size_t plane_size() const { return static_cast<size_t>(height) * width; }
  float* plane(int c) { return data.data() + plane_size() * c; }
  const float* plane(int c) const { return data.data() + plane_size() * c; }

  float& at(int c, int y, int x) { return data[plane_size() * c + static_cast<size_t>(y) * width + x]; }
  float at(int c, int y, int x) const { return data[plane_size() * c + static_cast<size_t>(y) * width + x]; }

  bool same_shape(const ScoreMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

enum class ProbMode { identity, softmax, sigmoid_like };

/// Score-to-probability mapping applied before peak extraction. sigmoid_like
/// carries the two scalar parameters of 1/(1+exp(-(w*x+b))).
struct ProbMap {
  ProbMode mode = ProbMode::identity;
  double w = 1.0;
  double b = 0.0;

  static ProbMap identity() { return {}; }
  static ProbMap softmax() { return {ProbMode::softmax, 1.0, 0.0}; }
  static ProbMap sigmoid_like(double w, double b) { return {ProbMode::sigmoid_like, w, b}; }
};

struct GroundtruthSpec {
  enum class Mode { disk, gaussian };
  Mode mode = Mode::gaussian;
  double radius_factor = 0.15;  // of the l-shoulder / r-hip distance
  double gauss_sigma = 1.5;     // px
  double min_radius = 0.0;      // 0 disables the floor; degenerate bodies then throw
};

/// Disk-label radius: radius_factor times the l-shoulder to r-hip distance.
/// Throws DegenerateBody when the two joints coincide.
double groundtruth_radius(const KeypointSet& kp, const Skeleton& sk, double factor);

/// Label maps for training. Disk mode assigns each pixel to the nearest joint
/// whose disk covers it (tie: lower joint index) and sets the background
/// channel where no disk does; channels partition the image. Gaussian mode
/// writes exp(-d^2 / (2 sigma^2)) per joint channel and leaves the background
/// channel zero. With visible_only, occluded joints get empty channels (and in
/// disk mode their pixels fall to the background).
ScoreMap make_groundtruth(const KeypointSet& kp, const Skeleton& sk, const GroundtruthSpec& spec,
                          int height, int width, bool visible_only = false);

/// Per-channel 2-d Gaussian convolution, kernel truncated at +/-ceil(3 sigma)
/// and renormalized to sum 1; symmetric reflection at the borders.
ScoreMap gaussian_blur(const ScoreMap& m, double sigma);

/// softmax: per-pixel softmax across all channels. sigmoid_like / identity:
/// elementwise.
ScoreMap score_to_prob(const ScoreMap& m, const ProbMap& pm);

/// Peak location of one channel after prob-mapping and blur. Ties break to the
/// first hit in row-major scan order.
Vec2 extract_channel_peak(const ScoreMap& m, int channel, double blur_sigma, const ProbMap& pm);

/// Joint positions from the K joint channels (background ignored): prob-map,
/// blur, per-channel argmax. All joints come back marked visible.
KeypointSet extract_positions(const ScoreMap& m, const Skeleton& sk, double blur_sigma,
                              const ProbMap& pm);

/// SMAP1 container: magic "SMAP", little-endian u32 version/channels/height/
/// width, then float32 planes channel-major. Round-trips bit-exactly.
void write_smap(const std::string& path, const ScoreMap& m);
ScoreMap read_smap(const std::string& path);

}  // namespace posenorm
