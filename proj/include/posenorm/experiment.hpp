#pragma once

#include <optional>
#include <vector>

#include "posenorm/config.hpp"
#include "posenorm/normalize.hpp"
#include "posenorm/refine.hpp"
#include "posenorm/synthdata.hpp"

namespace posenorm {

struct SynthOutput {
  Corpus corpus;
  std::vector<ScoreMap> detector_maps;
};

/// Sample n poses and simulate detector maps per the config. Deterministic in
/// the config seeds.
SynthOutput synthesize(const RunConfig& cfg, int n, bool with_maps = true);

/// Gaussian/disk labels for one annotation, occluded joints included.
ScoreMap groundtruth_for(const RunConfig& cfg, const Annotation& ann);

PipelineConfig make_pipeline_config(const RunConfig& cfg, bool normalize);

/// Stage-1 training pairs: detector maps and gaussian targets warped into the
/// body-normalized frame (or left alone for the no-normalization arm).
/// Targets keep the K joint channels only.
std::vector<TrainSample> global_training_set(const RunConfig& cfg,
                                             const std::vector<CorpusEntry>& entries,
                                             bool normalize);

/// Stage-2 training pairs for one limb: run stage 1 with the given global
/// net, limb-normalize its output maps, and warp the targets by the same
/// transforms. Targets are the limb's (root, middle, end) channels.
std::vector<TrainSample> limb_training_set(const RunConfig& cfg,
                                           const std::vector<CorpusEntry>& entries,
                                           const TinyNet<float>& global_net, int limb_index,
                                           bool normalize);

struct EvalRows {
  EvalReport detector;
  std::optional<EvalReport> stage1;
  std::optional<EvalReport> stage2;
};

/// Run the pipeline over a corpus and score each stage against the
/// annotations. Images are processed in parallel with a deterministic merge.
EvalRows evaluate_entries(const RunConfig& cfg, const std::vector<CorpusEntry>& entries,
                          const RefineNets& nets, bool normalize, int threads = 1);

/// Honors POSENORM_THREADS; falls back to 1.
int configured_threads();

}  // namespace posenorm
