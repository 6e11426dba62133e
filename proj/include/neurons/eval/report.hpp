#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurons/brain/frozen_encoder.hpp"
#include "neurons/eval/captions.hpp"
#include "neurons/eval/classifier.hpp"
#include "neurons/eval/metrics.hpp"
#include "neurons/harness/config.hpp"
#include "neurons/tasks/dataset.hpp"

namespace neurons::eval {

/// Report columns in output order.
inline const std::vector<std::string> kMetricNames{
    "video_2way", "video_50way", "clip_pcc", "frame_2way", "frame_50way", "ssim", "psnr",
    "dice",       "bleu1",       "bleu2",    "bleu3",      "bleu4",       "cider", "verb_acc"};

struct SampleMetrics {
    int clip_id = 0;
    std::map<std::string, double> values;
    std::vector<std::string> flags;
};

struct Stat {
    double mean = 0;
    double std = 0;  // sample standard deviation (n - 1); 0 for one sample
};

struct MetricReport {
    std::vector<SampleMetrics> samples;
    std::map<std::string, Stat> summary;
    std::vector<std::string> unpaired;
    std::string method = "ours";  // row label in the tables

    nlohmann::json to_json() const;
    std::string to_csv() const;
    /// Human-readable tables: video-based (2-way, 50-way, CLIP-pcc) and
    /// frame-based (2-way, 50-way, SSIM, PSNR), then Dice and caption scores.
    std::string to_table() const;
};

struct EvalBackends {
    const ClassifierBackend& classifier;
    const brain::FrozenEncoderTargets& embedder;
    const PosTagger& tagger;
    const WordEmbedder& words;
};

/// One reconstructed (or ground-truth) sample as stored in a run directory.
struct RunSample {
    int clip_id = 0;
    Video video;
    std::vector<Image> masks;
    std::string caption;
};

/// Reads every sample_NNNN directory (frames/, masks/, bundle/prompt.txt,
/// meta.json). Directories that cannot be read are reported in `skipped`.
std::vector<RunSample> read_run(const std::filesystem::path& run_dir,
                                std::vector<std::string>* skipped = nullptr);

/// Writes the ground truth in run-directory form: native-rate frames,
/// key-object masks, and the reference caption as the prompt.
void write_ground_truth_run(const Dataset& dataset, const std::filesystem::path& dir);

SampleMetrics evaluate_sample(const RunSample& pred, const DatasetSample& gt,
                              const EvalBackends& backends, const CiderD& cider,
                              const EvalConfig& cfg, std::uint64_t seed);

/// Pairs run samples with ground-truth clips by clip id; unpaired ids on
/// either side are listed and excluded. Summary rows are mean and std of
/// the per-sample values.
MetricReport evaluate_run(const std::vector<RunSample>& run, const Dataset& gt,
                          const EvalBackends& backends, const EvalConfig& cfg, std::uint64_t seed);

/// Reads `run_dir` and `gt_dir`, evaluates, and writes <out>.json,
/// <out>.csv and <out>.txt (any extension on `out` is dropped).
MetricReport emit_report(const std::filesystem::path& run_dir, const std::filesystem::path& gt_dir,
                         const std::filesystem::path& out, const EvalBackends& backends,
                         const EvalConfig& cfg, std::uint64_t seed,
                         const std::string& method = "ours");

}  // namespace neurons::eval
