#include "posenorm/scoremap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace posenorm {

double groundtruth_radius(const KeypointSet& kp, const Skeleton& sk, double factor) {
  const Vec2& ls = kp.points[sk.joint_index("l-shoulder")];
  const Vec2& rh = kp.points[sk.joint_index("r-hip")];
  double d = distance(ls, rh);
  if (d == 0.0) throw DegenerateBody("l-shoulder and r-hip coincide; no reference length");
  return factor * d;
}

ScoreMap make_groundtruth(const KeypointSet& kp, const Skeleton& sk, const GroundtruthSpec& spec,
                          int height, int width, bool visible_only) {
  validate_keypoints(kp, sk);
  const int k = sk.num_joints();
  ScoreMap out(k + 1, height, width, 0.0f);

  if (spec.mode == GroundtruthSpec::Mode::gaussian) {
    const double inv = 1.0 / (2.0 * spec.gauss_sigma * spec.gauss_sigma);
    for (int j = 0; j < k; ++j) {
      if (visible_only && !kp.visible[j]) continue;
      float* pl = out.plane(j);
      const Vec2 p = kp.points[j];
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double dx = x - p.x, dy = y - p.y;
          pl[static_cast<size_t>(y) * width + x] =
              static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv));
        }
      }
    }
    return out;  // background stays zero in gaussian mode
  }

  double r;
  try {
    r = groundtruth_radius(kp, sk, spec.radius_factor);
  } catch (const DegenerateBody&) {
    if (spec.min_radius > 0.0) {
      r = spec.min_radius;
    } else {
      throw;
    }
  }
  r = std::max(r, spec.min_radius);

  const double r2 = r * r;
  float* bg = out.plane(k);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int best = -1;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        if (visible_only && !kp.visible[j]) continue;
        double dx = x - kp.points[j].x, dy = y - kp.points[j].y;
        double d2 = dx * dx + dy * dy;
        if (d2 <= r2 && d2 < best_d2) {  // strict < keeps the lower index on ties
          best = j;
          best_d2 = d2;
        }
      }
      size_t off = static_cast<size_t>(y) * width + x;
      if (best >= 0) {
        out.plane(best)[off] = 1.0f;
      } else {
        bg[off] = 1.0f;
      }
    }
  }
  return out;
}

namespace {

std::vector<double> gaussian_kernel_1d(double sigma) {
  if (!(sigma > 0.0)) throw Error("blur sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Symmetric reflection with edge duplication: -1 -> 0, -2 -> 1, n -> n-1.
inline int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

ScoreMap gaussian_blur(const ScoreMap& m, double sigma) {
  const std::vector<double> k = gaussian_kernel_1d(sigma);
  const int radius = (static_cast<int>(k.size()) - 1) / 2;
  const int h = m.height, w = m.width;

  ScoreMap out(m.channels, h, w);
  std::vector<double> tmp(static_cast<size_t>(h) * w);

  for (int c = 0; c < m.channels; ++c) {
    const float* in = m.plane(c);
    // horizontal pass
    for (int y = 0; y < h; ++y) {
      const float* row = in + static_cast<size_t>(y) * w;
      double* trow = tmp.data() + static_cast<size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * row[reflect(x + i, w)];
        }
        trow[x] = acc;
      }
    }
    // vertical pass
    float* op = out.plane(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * tmp[static_cast<size_t>(reflect(y + i, h)) * w + x];
        }
        op[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

ScoreMap score_to_prob(const ScoreMap& m, const ProbMap& pm) {
  switch (pm.mode) {
    case ProbMode::identity:
      return m;
    case ProbMode::sigmoid_like: {
      ScoreMap out(m.channels, m.height, m.width);
      for (size_t i = 0; i < m.data.size(); ++i) {
        double x = m.data[i];
        out.data[i] = static_cast<float>(1.0 / (1.0 + std::exp(-(pm.w * x + pm.b))));
      }
      return out;
    }
    case ProbMode::softmax: {
      ScoreMap out(m.channels, m.height, m.width);
      const size_t plane = m.plane_size();
      for (size_t px = 0; px < plane; ++px) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < m.channels; ++c) mx = std::max(mx, static_cast<double>(m.data[plane * c + px]));
        double sum = 0.0;
        for (int c = 0; c < m.channels; ++c) sum += std::exp(m.data[plane * c + px] - mx);
        for (int c = 0; c < m.channels; ++c) {
          out.data[plane * c + px] = static_cast<float>(std::exp(m.data[plane * c + px] - mx) / sum);
        }
      }
      return out;
    }
  }
  throw Error("unreachable prob mode");
}

namespace {

Vec2 argmax_plane(const float* p, int h, int w) {
  float best = -std::numeric_limits<float>::infinity();
  int bx = 0, by = 0;
  size_t i = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x, ++i) {
      if (p[i] > best) {  // strict >: first hit in scan order wins ties
        best = p[i];
        bx = x;
        by = y;
      }
    }
  }
  return {static_cast<double>(bx), static_cast<double>(by)};
}

}  // namespace

Vec2 extract_channel_peak(const ScoreMap& m, int channel, double blur_sigma, const ProbMap& pm) {
  ScoreMap one(1, m.height, m.width);
  if (pm.mode == ProbMode::softmax) {
    // softmax needs all channels; map first, then take the channel
    ScoreMap mapped = score_to_prob(m, pm);
    std::copy_n(mapped.plane(channel), m.plane_size(), one.plane(0));
  } else {
    std::copy_n(m.plane(channel), m.plane_size(), one.plane(0));
    one = score_to_prob(one, pm);
  }
  ScoreMap blurred = gaussian_blur(one, blur_sigma);
  return argmax_plane(blurred.plane(0), m.height, m.width);
}

KeypointSet extract_positions(const ScoreMap& m, const Skeleton& sk, double blur_sigma,
                              const ProbMap& pm) {
  const int k = sk.num_joints();
  if (m.channels < k) throw ShapeMismatch("score map has fewer channels than joints");
  ScoreMap mapped = score_to_prob(m, pm);
  ScoreMap blurred = gaussian_blur(mapped, blur_sigma);
  KeypointSet kp(k);
  for (int j = 0; j < k; ++j) {
    kp.points[j] = argmax_plane(blurred.plane(j), m.height, m.width);
  }
  return kp;
}

namespace {

void write_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw IoError("truncated SMAP header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

static_assert(sizeof(float) == 4, "float32 layout assumed");

}  // namespace

void write_smap(const std::string& path, const ScoreMap& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f.write("SMAP", 4);
  write_u32(f, 1);
  write_u32(f, static_cast<uint32_t>(m.channels));
  write_u32(f, static_cast<uint32_t>(m.height));
  write_u32(f, static_cast<uint32_t>(m.width));
  // x86 is little-endian; floats go out verbatim
  f.write(reinterpret_cast<const char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(float)));
  if (!f) throw IoError("short write: " + path);
}

ScoreMap read_smap(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for read: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "SMAP", 4) != 0) throw ParseError("bad SMAP magic in " + path, 0);
  uint32_t version = read_u32(f);
  if (version != 1) throw ParseError("unsupported SMAP version in " + path, 4);
  uint32_t c = read_u32(f), h = read_u32(f), w = read_u32(f);
  ScoreMap m(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  f.read(reinterpret_cast<char*>(m.data.data()),
         static_cast<std::streamsize>(m.data.size() * sizeof(float)));
  if (!f) throw ParseError("truncated SMAP payload in " + path, 20);
  return m;
}

}  // namespace posenorm
