#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurons/tasks/dataset.hpp"

namespace neurons {

struct ModelDims {
    int hidden = 128;
    int tokens = 4;         // N
    int width = 32;         // C
    int text_tokens = 4;    // N_t
    int attn_width = 32;    // d
    int trunk_channels = 8;
    int latent_channels = 4;
    int vocab = 512;
    int text_hidden = 64;
    int max_decode = 32;
};

struct BrainTrainConfig {
    int epochs = 50;
    int batch_size = 8;
    double lr = 1e-3;
    double weight_decay = 0.0;
    double ridge_l2 = 1e-4;
    double tau = 0.006;
    double beta_alpha = 0.15;
    double mixco_fraction = 1.0 / 3.0;
};

struct DecouplerTrainConfig {
    int epochs = 50;
    int batch_size = 2;
    double lr = 1e-2;
    int period_epochs = 20;
    std::array<int, 4> period_starts{0, 5, 10, 15};
    double prior_lr_mult = 0.1;
    std::uint64_t seed = 0;  // 0 = derive from root seed
    std::vector<std::string> disabled_losses;  // subset of seg, cls, txt, rec
};

struct InferenceConfig {
    double mask_threshold = 0.5;
    double source_fps = 3.0;
    double target_fps = 8.0;
    std::string backend = "stub";
};

struct EvalConfig {
    int repeats = 100;
    int num_labels = 64;
    double verb_threshold = 0.8;
};

struct ExperimentConfig {
    std::uint64_t seed = 7;
    double priority_multiplier = 2.0;
    DatasetSpec dataset;
    ModelDims model;
    BrainTrainConfig brain;
    DecouplerTrainConfig decoupler;
    InferenceConfig inference;
    EvalConfig eval;

    /// Canonical JSON (sorted keys, every field present).
    nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON dump.
    std::string hash() const;
};

/// Strict parse: unknown keys and invariant violations raise ConfigError
/// naming the offending field. Missing keys take defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

}  // namespace neurons
