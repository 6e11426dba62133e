#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "neurons/brain/frozen_encoder.hpp"
#include "neurons/brain/model.hpp"
#include "neurons/harness/checkpoint.hpp"
#include "neurons/harness/config.hpp"
#include "neurons/tasks/dataset.hpp"

namespace neurons::brain {

struct BrainEpochLoss {
    int epoch = 0;
    double clip_v = 0;
    double clip_t = 0;
    double prior = 0;
    double total() const { return clip_v + clip_t + prior; }
};

struct BrainTrainOptions {
    /// Continue from a checkpoint written by an earlier (shorter) run.
    std::optional<Checkpoint> resume;
    /// Stop after this many completed epochs in total (defaults to config).
    std::optional<int> stop_after;
    std::function<void(const BrainEpochLoss&)> on_epoch;
};

struct BrainTrainResult {
    BrainModel model;
    Checkpoint checkpoint;
    std::vector<BrainEpochLoss> curve;
};

BrainDims brain_dims(const ExperimentConfig& cfg, int voxels);

/// Target tensors for every sample: F x (N*C) video rows and 1 x (N_t*C)
/// caption rows, stacked in dataset order.
struct BrainTargets {
    Mat video;  // (S*F) x (N*C)
    Mat text;   // S x (N_t*C)
};
BrainTargets compute_targets(const Dataset& dataset, const FrozenEncoderTargets& encoder);

Mat stack_voxels(const Dataset& dataset, const std::vector<std::size_t>& rows);

/// Optimises L_CLIPv (BiMixCo over frames) + L_CLIPt + L_prior with AdamW.
/// MixCo is applied during the first `mixco_fraction` of the epochs.
/// Throws NumericError on a non-finite loss.
BrainTrainResult train_brain_model(const Dataset& dataset, const ExperimentConfig& cfg,
                                   const FrozenEncoderTargets& encoder,
                                   const BrainTrainOptions& options = {});

}  // namespace neurons::brain
