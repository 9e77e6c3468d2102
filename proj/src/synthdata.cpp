#include "posenorm/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "posenorm/geometry.hpp"

namespace fs = std::filesystem;

namespace posenorm {

BoneConfig BoneConfig::scaled(double s) const {
  BoneConfig b = *this;
  b.shoulder_half *= s;
  b.hip_half *= s;
  b.torso_half_height *= s;
  b.neck_rise *= s;
  b.head_len *= s;
  b.upper_arm *= s;
  b.forearm *= s;
  b.thigh *= s;
  b.shin *= s;
  return b;
}

PoseSamplerConfig PoseSamplerConfig::for_canvas(int h, int w) {
  PoseSamplerConfig cfg;
  cfg.canvas_h = h;
  cfg.canvas_w = w;
  cfg.bones = BoneConfig{}.scaled(std::min(h, w) / 64.0);
  return cfg;
}

namespace {

Vec2 dir_down(double a) { return {std::sin(a), std::cos(a)}; }  // a=0 points straight down

struct PoseDraw {
  double global = 0.0, head = 0.0;
  double limb_root[4] = {0, 0, 0, 0};
  double limb_hinge[4] = {0, 0, 0, 0};
};

KeypointSet build_pose(const PoseSamplerConfig& cfg, const PoseDraw& d, double shrink) {
  const Skeleton& sk = canonical_skeleton();
  const BoneConfig b = cfg.bones.scaled(shrink);
  KeypointSet kp(sk.num_joints());

  auto set = [&](const char* name, Vec2 p) { kp.points[sk.joint_index(name)] = p; };
  set("l-shoulder", {+b.shoulder_half, -b.torso_half_height});
  set("r-shoulder", {-b.shoulder_half, -b.torso_half_height});
  set("l-hip", {+b.hip_half, +b.torso_half_height});
  set("r-hip", {-b.hip_half, +b.torso_half_height});
  set("neck", {0.0, -b.neck_rise});
  Vec2 neck = kp.points[sk.neck_index];
  set("head-top", neck + dir_down(d.head) * (-b.head_len));

  for (int l = 0; l < kNumLimbs; ++l) {
    const LimbDef& limb = sk.limb_defs[l];
    const bool arm = l < 2;
    double len1 = arm ? b.upper_arm : b.thigh;
    double len2 = arm ? b.forearm : b.shin;
    Vec2 root = kp.points[limb.root];
    Vec2 mid = root + dir_down(d.limb_root[l]) * len1;
    Vec2 end = mid + dir_down(d.limb_root[l] + d.limb_hinge[l]) * len2;
    kp.points[limb.middle] = mid;
    kp.points[limb.end] = end;
  }

  // global rotation about the torso center (the local origin), then shift to
  // the canvas center
  Mat2 rot = rotation_matrix(d.global);
  Vec2 center{(cfg.canvas_w - 1) / 2.0, (cfg.canvas_h - 1) / 2.0};
  for (Vec2& p : kp.points) p = rot * p + center;
  return kp;
}

bool fits(const KeypointSet& kp, const PoseSamplerConfig& cfg) {
  for (const Vec2& p : kp.points) {
    if (p.x < cfg.margin || p.x > cfg.canvas_w - 1 - cfg.margin || p.y < cfg.margin ||
        p.y > cfg.canvas_h - 1 - cfg.margin) {
      return false;
    }
  }
  return true;
}

}  // namespace

KeypointSet sample_pose(const PoseSamplerConfig& cfg, Rng& rng) {
  const Skeleton& sk = canonical_skeleton();
  auto draw_in = [&](const AngleRange& r) { return rng.uniform(r.lo, r.hi); };

  KeypointSet kp;
  bool placed = false;
  PoseDraw d;
  for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
    d.global = draw_in(cfg.global_rotation);
    d.head = draw_in(cfg.head_tilt);
    for (int l = 0; l < kNumLimbs; ++l) {
      d.limb_root[l] = draw_in(l < 2 ? cfg.arm_root : cfg.leg_root);
      d.limb_hinge[l] = draw_in(l < 2 ? cfg.elbow : cfg.knee);
    }
    kp = build_pose(cfg, d, 1.0);
    placed = fits(kp, cfg);
  }
  if (!placed) {
    // keep the last draw and shrink the figure until it fits
    double shrink = 0.9;
    for (; shrink > 0.05; shrink *= 0.9) {
      kp = build_pose(cfg, d, shrink);
      if (fits(kp, cfg)) {
        placed = true;
        break;
      }
    }
    if (!placed) throw CanvasTooSmall("pose cannot fit the canvas even after shrinking");
  }

  for (int j = 0; j < sk.num_joints(); ++j) {
    kp.visible[j] = !rng.bernoulli(cfg.occlusion_prob);
  }
  return kp;
}

namespace {

// out(q) = in(q - delta), bilinear, zero outside. Exact copy for delta = 0.
void translate_plane(const float* in, float* out, int h, int w, double dx_, double dy_,
                     double amp) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sx = x - dx_, sy = y - dy_;
      double xf = std::floor(sx), yf = std::floor(sy);
      int x0 = static_cast<int>(xf), y0 = static_cast<int>(yf);
      double fx = sx - xf, fy = sy - yf;
      auto tap = [&](int xx, int yy) -> double {
        return (xx >= 0 && xx < w && yy >= 0 && yy < h) ? in[static_cast<size_t>(yy) * w + xx]
                                                        : 0.0;
      };
      double v = (1.0 - fy) * ((1.0 - fx) * tap(x0, y0) + fx * tap(x0 + 1, y0)) +
                 fy * ((1.0 - fx) * tap(x0, y0 + 1) + fx * tap(x0 + 1, y0 + 1));
      out[static_cast<size_t>(y) * w + x] = static_cast<float>(v * amp);
    }
  }
}

}  // namespace

ScoreMap simulate_detector(const ScoreMap& gt, const NoiseSpec& spec, double gauss_sigma,
                           Rng& rng) {
  ScoreMap out = gt;
  const int h = gt.height, w = gt.width;
  for (int c = 0; c < gt.channels - 1; ++c) {  // background channel passes through
    double dx = rng.normal(0.0, spec.jitter_sigma);
    double dy = rng.normal(0.0, spec.jitter_sigma);
    double amp = 1.0 + rng.uniform(-spec.amplitude_noise, spec.amplitude_noise);
    translate_plane(gt.plane(c), out.plane(c), h, w, dx, dy, amp);

    if (rng.bernoulli(spec.false_peak_prob)) {
      double cx = rng.uniform(0.0, w - 1.0);
      double cy = rng.uniform(0.0, h - 1.0);
      float* pl = out.plane(c);
      float peak = *std::max_element(pl, pl + gt.plane_size());
      double gain = spec.false_peak_gain * peak;
      double inv = 1.0 / (2.0 * gauss_sigma * gauss_sigma);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double ddx = x - cx, ddy = y - cy;
          pl[static_cast<size_t>(y) * w + x] +=
              static_cast<float>(gain * std::exp(-(ddx * ddx + ddy * ddy) * inv));
        }
      }
    }
  }
  return out;
}

Augmented augment(const KeypointSet& kp, const ScoreMap* map, int canvas_h, int canvas_w,
                  const AugmentParams& params, Rng& rng) {
  const Skeleton& sk = canonical_skeleton();
  Augmented out;
  out.scale = params.scale ? rng.uniform(0.80, 1.25) : 1.0;
  out.flipped = params.flip ? rng.bernoulli(0.5) : false;
  if (params.rotate) {
    out.rotation = params.mode == AugmentParams::Mode::lsp ? rng.uniform(0.0, 2.0 * kPi)
                                                           : rng.uniform(-kPi / 6.0, kPi / 6.0);
  }

  const Vec2 center{(canvas_w - 1) / 2.0, (canvas_h - 1) / 2.0};
  const Mat2 rot = rotation_matrix(out.rotation);
  const bool pure_identity = !params.scale && !params.flip && !params.rotate;

  out.kp = kp;
  if (!pure_identity) {
    KeypointSet src = kp;
    if (out.flipped) {
      KeypointSet flipped(sk.num_joints());
      for (int j = 0; j < sk.num_joints(); ++j) {
        int fj = sk.flipped_joint(j);
        flipped.points[j] = {canvas_w - 1 - kp.points[fj].x, kp.points[fj].y};
        flipped.visible[j] = kp.visible[fj];
      }
      src = flipped;
    }
    for (int j = 0; j < sk.num_joints(); ++j) {
      out.kp.points[j] = center + (rot * (src.points[j] - center)) * out.scale;
      out.kp.visible[j] = src.visible[j];
    }
  }

  if (map != nullptr) {
    if (pure_identity) {
      out.map = *map;
    } else {
      ScoreMap warped(map->channels, map->height, map->width);
      const Mat2 rinv = rot.transposed();
      const int h = map->height, w = map->width;
      for (int c = 0; c < map->channels; ++c) {
        // flipping swaps left/right joint channels; background stays put
        int src_c = c;
        if (out.flipped && c < sk.num_joints()) src_c = sk.flipped_joint(c);
        const float* in = map->plane(src_c);
        float* op = warped.plane(c);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            Vec2 q{static_cast<double>(x), static_cast<double>(y)};
            Vec2 s = center + (rinv * (q - center)) * (1.0 / out.scale);
            if (out.flipped) s.x = w - 1 - s.x;
            double xf = std::floor(s.x), yf = std::floor(s.y);
            int x0 = static_cast<int>(xf), y0 = static_cast<int>(yf);
            double fx = s.x - xf, fy = s.y - yf;
            auto tap = [&](int xx, int yy) -> double {
              return (xx >= 0 && xx < w && yy >= 0 && yy < h)
                         ? in[static_cast<size_t>(yy) * w + xx]
                         : 0.0;
            };
            double v = (1.0 - fy) * ((1.0 - fx) * tap(x0, y0) + fx * tap(x0 + 1, y0)) +
                       fy * ((1.0 - fx) * tap(x0, y0 + 1) + fx * tap(x0 + 1, y0 + 1));
            op[static_cast<size_t>(y) * w + x] = static_cast<float>(v);
          }
        }
      }
      out.map = std::move(warped);
    }
  }
  return out;
}

namespace {

double point_segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  Vec2 proj = a + ab * t;
  Vec2 d = p - proj;
  return d.dot(d);
}

}  // namespace

ScoreMap render_stick_figure(const KeypointSet& kp, const Skeleton& sk, int h, int w,
                             double stroke_sigma) {
  validate_keypoints(kp, sk);
  auto j = [&](const char* name) { return kp.points[sk.joint_index(name)]; };
  std::vector<std::pair<Vec2, Vec2>> segments = {
      {j("l-shoulder"), j("r-shoulder")}, {j("l-hip"), j("r-hip")},
      {j("l-shoulder"), j("l-hip")},      {j("r-shoulder"), j("r-hip")},
      {j("neck"), j("l-shoulder")},       {j("neck"), j("r-shoulder")},
      {j("neck"), j("head-top")},
  };
  for (const LimbDef& limb : sk.limb_defs) {
    segments.emplace_back(kp.points[limb.root], kp.points[limb.middle]);
    segments.emplace_back(kp.points[limb.middle], kp.points[limb.end]);
  }

  ScoreMap out(1, h, w);
  const double inv = 1.0 / (2.0 * stroke_sigma * stroke_sigma);
  float* pl = out.plane(0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      double best = 0.0;
      for (const auto& [a, b] : segments) {
        best = std::max(best, std::exp(-point_segment_dist2(p, a, b) * inv));
      }
      pl[static_cast<size_t>(y) * w + x] = static_cast<float>(best);
    }
  }
  return out;
}

namespace {

nlohmann::json annotation_to_json(const Annotation& a) {
  const Skeleton& sk = canonical_skeleton();
  nlohmann::json joints = nlohmann::json::array();
  for (int j = 0; j < sk.num_joints(); ++j) {
    joints.push_back({{"name", sk.joint_names[j]},
                      {"x", a.kp.points[j].x},
                      {"y", a.kp.points[j].y},
                      {"visible", static_cast<bool>(a.kp.visible[j])}});
  }
  return {{"id", a.id}, {"width", a.width}, {"height", a.height}, {"joints", joints}};
}

Annotation annotation_from_json(const nlohmann::json& obj) {
  const Skeleton& sk = canonical_skeleton();
  Annotation a;
  try {
    a.id = obj.at("id").get<std::string>();
    a.width = obj.at("width").get<int>();
    a.height = obj.at("height").get<int>();
    const auto& joints = obj.at("joints");
    if (!joints.is_array() || static_cast<int>(joints.size()) != sk.num_joints()) {
      throw SchemaMismatch("annotation must carry exactly 14 joints");
    }
    a.kp = KeypointSet(sk.num_joints());
    for (int j = 0; j < sk.num_joints(); ++j) {
      const auto& jj = joints[j];
      if (jj.at("name").get<std::string>() != sk.joint_names[j]) {
        throw SchemaMismatch("joint " + std::to_string(j) + " out of canonical order: " +
                             jj.at("name").get<std::string>());
      }
      a.kp.points[j] = {jj.at("x").get<double>(), jj.at("y").get<double>()};
      a.kp.visible[j] = jj.at("visible").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("annotation schema error: ") + e.what());
  }
  return a;
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for read: " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what(), e.byte);
  }
}

}  // namespace

void write_annotations(const std::string& path, const Corpus& corpus) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Annotation& a : corpus) arr.push_back(annotation_to_json(a));
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for write: " + path);
  f << arr.dump(1) << "\n";
  if (!f) throw IoError("short write: " + path);
}

Corpus read_annotations(const std::string& path) {
  nlohmann::json doc = parse_file(path);
  Corpus corpus;
  if (doc.is_array()) {
    for (const auto& obj : doc) corpus.push_back(annotation_from_json(obj));
  } else {
    corpus.push_back(annotation_from_json(doc));
  }
  return corpus;
}

void write_corpus_dir(const std::string& dir, const Corpus& corpus,
                      const std::vector<ScoreMap>* detector_maps) {
  if (detector_maps != nullptr && detector_maps->size() != corpus.size()) {
    throw ShapeMismatch("detector map count does not match corpus");
  }
  fs::create_directories(dir);
  nlohmann::json ids = nlohmann::json::array();
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Annotation& a = corpus[i];
    ids.push_back(a.id);
    std::ofstream f(fs::path(dir) / (a.id + ".json"));
    if (!f) throw IoError("cannot write annotation for " + a.id);
    f << annotation_to_json(a).dump(1) << "\n";
    if (detector_maps != nullptr) {
      write_smap((fs::path(dir) / (a.id + ".smap")).string(), (*detector_maps)[i]);
    }
  }
  std::ofstream f(fs::path(dir) / "index.json");
  if (!f) throw IoError("cannot write corpus index");
  f << nlohmann::json{{"ids", ids}}.dump(1) << "\n";
}

std::vector<CorpusEntry> read_corpus_dir(const std::string& dir) {
  nlohmann::json index = parse_file((fs::path(dir) / "index.json").string());
  if (!index.contains("ids") || !index["ids"].is_array()) {
    throw SchemaMismatch("corpus index.json has no ids array");
  }
  std::vector<CorpusEntry> entries;
  for (const auto& id_json : index["ids"]) {
    std::string id = id_json.get<std::string>();
    CorpusEntry e;
    nlohmann::json ann = parse_file((fs::path(dir) / (id + ".json")).string());
    e.ann = annotation_from_json(ann);
    fs::path smap = fs::path(dir) / (id + ".smap");
    if (fs::exists(smap)) e.smap_path = smap.string();
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace posenorm
