#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "posenorm/config.hpp"
#include "posenorm/experiment.hpp"
#include "posenorm/geometry.hpp"
#include "posenorm/metrics.hpp"
#include "posenorm/normalize.hpp"
#include "posenorm/refine.hpp"
#include "posenorm/scoremap.hpp"
#include "posenorm/skeleton.hpp"
#include "posenorm/synthdata.hpp"

namespace py = pybind11;
using namespace posenorm;

namespace {

py::array_t<float> scoremap_to_numpy(const ScoreMap& m) {
  py::array_t<float> arr({m.channels, m.height, m.width});
  std::copy(m.data.begin(), m.data.end(), arr.mutable_data());
  return arr;
}

ScoreMap scoremap_from_numpy(py::array_t<float, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 3) throw ShapeMismatch("score map array must be (channels, height, width)");
  ScoreMap m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
             static_cast<int>(arr.shape(2)));
  std::copy(arr.data(), arr.data() + m.data.size(), m.data.begin());
  return m;
}

KeypointSet kp_from_lists(const std::vector<std::pair<double, double>>& pts,
                          const std::vector<bool>& visible) {
  KeypointSet kp(static_cast<int>(pts.size()));
  for (size_t i = 0; i < pts.size(); ++i) kp.points[i] = {pts[i].first, pts[i].second};
  if (!visible.empty()) {
    if (visible.size() != pts.size()) throw ShapeMismatch("visibility length mismatch");
    kp.visible.assign(visible.begin(), visible.end());
  }
  return kp;
}

ProbMap make_prob_map(const std::string& mode, double w, double b) {
  if (mode == "identity") return ProbMap::identity();
  if (mode == "softmax") return ProbMap::softmax();
  if (mode == "sigmoid_like") return ProbMap::sigmoid_like(w, b);
  throw ConfigError("mode must be identity, softmax or sigmoid_like");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Score-map pose normalization: transforms, refinement nets, metrics";

  py::register_exception<Error>(m, "PosenormError");

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<double, double>())
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("__repr__", [](const Vec2& v) {
        return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
      });

  py::class_<LimbDef>(m, "LimbDef")
      .def_readonly("root", &LimbDef::root)
      .def_readonly("middle", &LimbDef::middle)
      .def_readonly("end", &LimbDef::end)
      .def_readonly("name", &LimbDef::name);

  py::class_<Skeleton>(m, "Skeleton")
      .def_readonly("joint_names", &Skeleton::joint_names)
      .def_readonly("torso_joints", &Skeleton::torso_joints)
      .def_readonly("neck_index", &Skeleton::neck_index)
      .def_readonly("head_index", &Skeleton::head_index)
      .def_property_readonly("limb_defs",
                             [](const Skeleton& sk) {
                               return std::vector<LimbDef>(sk.limb_defs.begin(),
                                                           sk.limb_defs.end());
                             })
      .def("joint_index", &Skeleton::joint_index)
      .def("num_joints", &Skeleton::num_joints);

  m.def("canonical_skeleton", &canonical_skeleton, py::return_value_policy::reference);

  py::class_<KeypointSet>(m, "KeypointSet")
      .def(py::init([](const std::vector<std::pair<double, double>>& pts,
                       const std::vector<bool>& visible) { return kp_from_lists(pts, visible); }),
           py::arg("points"), py::arg("visible") = std::vector<bool>{})
      .def_property_readonly("points",
                             [](const KeypointSet& kp) {
                               std::vector<std::pair<double, double>> out;
                               for (const Vec2& p : kp.points) out.emplace_back(p.x, p.y);
                               return out;
                             })
      .def_property_readonly(
          "visible", [](const KeypointSet& kp) { return std::vector<bool>(kp.visible); })
      .def("__len__", &KeypointSet::size);

  m.def("torso_center", [](const KeypointSet& kp) {
    Vec2 c = torso_center(kp, canonical_skeleton());
    return std::make_pair(c.x, c.y);
  });

  // score maps travel as numpy arrays of shape (channels, height, width)
  m.def(
      "make_groundtruth",
      [](const KeypointSet& kp, const std::string& mode, double radius_factor, double gauss_sigma,
         double min_radius, int height, int width, bool visible_only) {
        GroundtruthSpec spec;
        spec.mode = mode == "disk" ? GroundtruthSpec::Mode::disk : GroundtruthSpec::Mode::gaussian;
        spec.radius_factor = radius_factor;
        spec.gauss_sigma = gauss_sigma;
        spec.min_radius = min_radius;
        return scoremap_to_numpy(
            make_groundtruth(kp, canonical_skeleton(), spec, height, width, visible_only));
      },
      py::arg("kp"), py::arg("mode") = "gaussian", py::arg("radius_factor") = 0.15,
      py::arg("gauss_sigma") = 1.5, py::arg("min_radius") = 1.0, py::arg("height") = 64,
      py::arg("width") = 64, py::arg("visible_only") = false);

  m.def("groundtruth_radius", [](const KeypointSet& kp, double factor) {
    return groundtruth_radius(kp, canonical_skeleton(), factor);
  });

  m.def(
      "gaussian_blur",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, double sigma) {
        return scoremap_to_numpy(gaussian_blur(scoremap_from_numpy(arr), sigma));
      },
      py::arg("map"), py::arg("sigma"));

  m.def(
      "score_to_prob",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr,
         const std::string& mode, double w, double b) {
        return scoremap_to_numpy(score_to_prob(scoremap_from_numpy(arr), make_prob_map(mode, w, b)));
      },
      py::arg("map"), py::arg("mode"), py::arg("w") = 1.0, py::arg("b") = 0.0);

  m.def(
      "extract_positions",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, double blur_sigma,
         const std::string& mode, double w, double b) {
        return extract_positions(scoremap_from_numpy(arr), canonical_skeleton(), blur_sigma,
                                 make_prob_map(mode, w, b));
      },
      py::arg("map"), py::arg("blur_sigma") = 1.5, py::arg("mode") = "identity",
      py::arg("w") = 1.0, py::arg("b") = 0.0);

  m.def("rotation_matrix", [](double theta) {
    Mat2 r = rotation_matrix(theta);
    return std::vector<std::vector<double>>{{r.m00, r.m01}, {r.m10, r.m11}};
  });
  m.def("signed_angle_to_vertical",
        [](double x, double y) { return signed_angle_to_vertical({x, y}); });

  py::class_<Transform2D>(m, "Transform2D")
      .def_static(
          "rotation_about",
          [](double theta, double cx, double cy) {
            return Transform2D::rotation_about(theta, {cx, cy});
          },
          py::arg("theta"), py::arg("cx"), py::arg("cy"))
      .def_static("identity", &Transform2D::identity)
      .def_property_readonly("center",
                             [](const Transform2D& t) { return std::make_pair(t.center.x, t.center.y); });

  m.def("transform_point", [](const Transform2D& t, double x, double y) {
    Vec2 p = transform_point(t, {x, y});
    return std::make_pair(p.x, p.y);
  });
  m.def("invert", &invert);
  m.def(
      "warp_map",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, const Transform2D& t,
         const std::vector<int>& subset) {
        return scoremap_to_numpy(
            warp_map(scoremap_from_numpy(arr), t, std::span<const int>(subset)));
      },
      py::arg("map"), py::arg("transform"), py::arg("channel_subset") = std::vector<int>{});
  m.def(
      "warp_backward",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, const Transform2D& t,
         const std::vector<int>& subset) {
        return scoremap_to_numpy(
            warp_backward(scoremap_from_numpy(arr), t, std::span<const int>(subset)));
      },
      py::arg("grad_out"), py::arg("transform"), py::arg("channel_subset") = std::vector<int>{});

  py::class_<StampedTransform>(m, "StampedTransform")
      .def_readonly("t", &StampedTransform::t)
      .def_property_readonly("degenerate", [](const StampedTransform& st) {
        return st.flag == TransformFlag::degenerate_identity;
      });

  m.def("body_transform_params", [](const KeypointSet& kp, double eps) {
    return body_transform_params(kp, canonical_skeleton(), eps);
  }, py::arg("kp"), py::arg("eps_pos") = 1e-3);
  m.def("limb_transform_params", [](const KeypointSet& kp, int limb, double eps) {
    return limb_transform_params(kp, canonical_skeleton(), limb, eps);
  }, py::arg("kp"), py::arg("limb_index"), py::arg("eps_pos") = 1e-3);

  m.def(
      "body_normalize",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, const Transform2D& t) {
        return scoremap_to_numpy(body_normalize(scoremap_from_numpy(arr), t));
      },
      py::arg("map"), py::arg("transform"));
  m.def(
      "limb_normalize",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, int limb,
         const Transform2D& t) {
        return scoremap_to_numpy(limb_normalize(scoremap_from_numpy(arr), canonical_skeleton(),
                                                limb, t));
      },
      py::arg("map"), py::arg("limb_index"), py::arg("transform"));

  m.def(
      "run_pipeline_passthrough",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> arr, double blur_sigma) {
        PipelineConfig cfg;
        cfg.extract_blur_sigma = blur_sigma;
        PipelineResult pr =
            run_pipeline(scoremap_from_numpy(arr), canonical_skeleton(), cfg, RefineNets{});
        return py::make_tuple(pr.final_keypoints, pr.detector_keypoints);
      },
      py::arg("detector_maps"), py::arg("blur_sigma") = 1.5,
      "Full normalize/denormalize pipeline with pass-through refinement nets.");

  m.def(
      "pck",
      [](const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts, double alpha,
         const std::string& ref_mode) {
        EvalConfig cfg;
        cfg.alpha = alpha;
        cfg.ref_mode = ref_mode == "head" ? EvalConfig::Ref::head : EvalConfig::Ref::torso;
        EvalReport rep = pck(preds, gts, canonical_skeleton(), cfg);
        py::dict out;
        out["total"] = rep.total;
        py::dict per;
        for (size_t j = 0; j < rep.joint_names.size(); ++j) {
          per[py::str(rep.joint_names[j])] = rep.per_joint_pck[j];
        }
        out["per_joint"] = per;
        out["n_images"] = rep.n_images;
        return out;
      },
      py::arg("preds"), py::arg("gts"), py::arg("alpha") = 0.2, py::arg("ref_mode") = "torso");

  m.def(
      "auc",
      [](const std::vector<KeypointSet>& preds, const std::vector<KeypointSet>& gts,
         double auc_max, double auc_step, const std::string& ref_mode) {
        EvalConfig cfg;
        cfg.auc_max = auc_max;
        cfg.auc_step = auc_step;
        cfg.ref_mode = ref_mode == "head" ? EvalConfig::Ref::head : EvalConfig::Ref::torso;
        return auc(preds, gts, canonical_skeleton(), cfg);
      },
      py::arg("preds"), py::arg("gts"), py::arg("auc_max") = 0.5, py::arg("auc_step") = 0.01,
      py::arg("ref_mode") = "torso");

  m.def("compactness", [](const std::vector<std::pair<double, double>>& cloud) {
    std::vector<Vec2> pts;
    for (const auto& [x, y] : cloud) pts.push_back({x, y});
    Compactness c = compactness(pts);
    return py::make_tuple(c.cov_trace, c.r90);
  });

  m.def(
      "sample_pose",
      [](int canvas_h, int canvas_w, uint64_t seed, double occlusion_prob) {
        PoseSamplerConfig cfg = PoseSamplerConfig::for_canvas(canvas_h, canvas_w);
        cfg.occlusion_prob = occlusion_prob;
        Rng rng(seed);
        return sample_pose(cfg, rng);
      },
      py::arg("canvas_h") = 64, py::arg("canvas_w") = 64, py::arg("seed") = 1,
      py::arg("occlusion_prob") = 0.0);

  m.def(
      "simulate_detector",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> gt, double jitter_sigma,
         double amplitude_noise, double false_peak_prob, double false_peak_gain,
         double gauss_sigma, uint64_t seed) {
        NoiseSpec spec{jitter_sigma, amplitude_noise, false_peak_prob, false_peak_gain};
        Rng rng(seed);
        return scoremap_to_numpy(
            simulate_detector(scoremap_from_numpy(gt), spec, gauss_sigma, rng));
      },
      py::arg("gt"), py::arg("jitter_sigma") = 0.0, py::arg("amplitude_noise") = 0.0,
      py::arg("false_peak_prob") = 0.0, py::arg("false_peak_gain") = 1.5,
      py::arg("gauss_sigma") = 1.5, py::arg("seed") = 1);

  m.def(
      "read_smap",
      [](const std::string& path) { return scoremap_to_numpy(read_smap(path)); });
  m.def("write_smap", [](const std::string& path,
                         py::array_t<float, py::array::c_style | py::array::forcecast> arr) {
    write_smap(path, scoremap_from_numpy(arr));
  });

  m.def("fuse_scales",
        [](const std::vector<py::array_t<float, py::array::c_style | py::array::forcecast>>& arrs,
           const std::vector<float>& weights, const std::vector<float>& bias) {
          std::vector<ScoreMap> maps;
          for (const auto& a : arrs) maps.push_back(scoremap_from_numpy(a));
          return scoremap_to_numpy(fuse_scales(maps, weights, bias));
        },
        py::arg("maps"), py::arg("weights"), py::arg("bias") = std::vector<float>{});

  m.def("progressive_schedule", [](int phase) {
    std::vector<std::string> names;
    for (LossId id : progressive_schedule(phase)) {
      switch (id) {
        case LossId::D1: names.push_back("L_D1"); break;
        case LossId::D2: names.push_back("L_D2"); break;
        case LossId::D3: names.push_back("L_D3"); break;
        case LossId::F1: names.push_back("L_F1"); break;
        case LossId::F2: names.push_back("L_F2"); break;
      }
    }
    return names;
  });

  m.attr("__version__") = "0.1.0";
}
