#pragma once

// Orchestrates prepare-data -> train-brain -> train-decoupler -> infer -> eval
// inside one output directory:
//
//   out/manifest.json                 run manifest (rewritten atomically)
//   out/data/                         synthetic dataset
//   out/checkpoints/brain.ckpt
//   out/checkpoints/decoupler.ckpt
//   out/logs/decoupler.csv            per-batch training log
//   out/run/sample_NNNN/              reconstructions
//   out/report/metrics.{json,csv,txt}
//
// A stage is skipped on resume when the manifest records it as done under
// the same config hash, its recorded inputs match the current upstream
// outputs, and its own outputs still hash-verify.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurons/common/error.hpp"
#include "neurons/harness/config.hpp"

namespace neurons::harness {

inline const std::vector<std::string> kStages{"prepare-data", "train-brain", "train-decoupler",
                                              "infer", "eval"};

/// A stage threw; the manifest on disk records the partial lineage.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineOptions {
    /// Last stage to execute (inclusive); defaults to the whole pipeline.
    std::optional<std::string> until;
    /// Ignore the manifest and rerun every requested stage.
    bool force = false;
};

struct PipelineResult {
    nlohmann::json manifest;
    std::vector<std::string> executed;
    std::vector<std::string> skipped;
};

struct Paths {
    std::filesystem::path root;
    std::filesystem::path manifest() const { return root / "manifest.json"; }
    std::filesystem::path data() const { return root / "data"; }
    std::filesystem::path brain_ckpt() const { return root / "checkpoints" / "brain.ckpt"; }
    std::filesystem::path decoupler_ckpt() const { return root / "checkpoints" / "decoupler.ckpt"; }
    std::filesystem::path last_good() const { return root / "checkpoints" / "decoupler.last_good.ckpt"; }
    std::filesystem::path train_log() const { return root / "logs" / "decoupler.csv"; }
    std::filesystem::path run() const { return root / "run"; }
    std::filesystem::path report() const { return root / "report" / "metrics"; }
};

/// Applies the NEURONS_BACKEND override and validates.
ExperimentConfig effective_config(ExperimentConfig cfg);

/// ConfigError passes through unchanged; any other stage failure is
/// rethrown as StageError after the manifest is updated.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out,
                            const PipelineOptions& options = {});

/// Manifest entries that fail to verify (missing files, hash mismatches).
std::vector<std::string> verify_manifest(const std::filesystem::path& out);

/// Copy of a manifest without wall-clock fields, for run-to-run comparison.
nlohmann::json strip_timings(nlohmann::json manifest);

// Single stages on explicit paths, without a manifest. Each returns the
// stage summary.

/// Generates the synthetic dataset into `data_dir` (replacing it).
nlohmann::json prepare_data_at(const ExperimentConfig& cfg, const std::filesystem::path& data_dir);
nlohmann::json train_brain_at(const ExperimentConfig& cfg, const std::filesystem::path& data_dir,
                              const std::filesystem::path& out);
/// The training log goes to `out` with a .csv extension and the last good
/// checkpoint to .last_good.ckpt beside it.
nlohmann::json train_decoupler_at(const ExperimentConfig& cfg, const std::filesystem::path& data_dir,
                                  const std::filesystem::path& brain_ckpt,
                                  const std::filesystem::path& out);
/// External backend scratch files go to <run_dir>.backend.
nlohmann::json infer_at(const ExperimentConfig& cfg, const std::filesystem::path& data_dir,
                        const std::filesystem::path& brain_ckpt,
                        const std::filesystem::path& decoupler_ckpt,
                        const std::filesystem::path& run_dir);

/// Evaluates `run_dir` against the dataset in `gt_dir`, writing
/// <stem>.json, <stem>.csv and <stem>.txt.
nlohmann::json evaluate_paths(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                              const std::filesystem::path& gt_dir, const std::filesystem::path& stem,
                              const std::string& method = "ours");

/// Evaluates any run directory against out/data into out/report/<stem>.*
/// and returns the JSON report.
nlohmann::json evaluate_directory(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                  const std::filesystem::path& run_dir, const std::string& stem);
/// Writes the ground truth as a run under out/gt_run and evaluates it
/// against itself into out/report/gt_self.*.
nlohmann::json ground_truth_self_report(const ExperimentConfig& cfg,
                                        const std::filesystem::path& out);

}  // namespace neurons::harness
