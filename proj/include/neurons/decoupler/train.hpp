#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "neurons/brain/frozen_encoder.hpp"
#include "neurons/brain/model.hpp"
#include "neurons/decoupler/latent.hpp"
#include "neurons/decoupler/layers.hpp"
#include "neurons/decoupler/model.hpp"
#include "neurons/harness/checkpoint.hpp"
#include "neurons/harness/config.hpp"
#include "neurons/tasks/dataset.hpp"

namespace neurons::decoupler {

DecouplerDims decoupler_dims(const ExperimentConfig& cfg);

/// Per-sample supervision in the shapes the heads produce.
struct SampleTargets {
    Mat masks;        // F x (S*S), binary, key-object masks at trunk resolution
    Mat latents;      // F x latent_dim
    RowVec concepts;  // 1 x 51
    std::vector<int> tokens;
    RowVec key_text;  // frozen text embedding of the key-object concept name
};
std::vector<SampleTargets> build_targets(const Dataset& dataset, const DecouplerDims& dims,
                                         const brain::FrozenEncoderTargets& encoder,
                                         const LatentCodec& codec);

/// Downsamples a full-resolution binary mask to the trunk grid (block mean,
/// then >= 0.5).
RowVec mask_to_grid(const Image& mask, int grid);

struct TrainLogRow {
    int epoch = 0;
    int batch = 0;
    LossWeights weights{};
    LossValues losses{};
    double total = 0;
};

struct DecouplerTrainOptions {
    /// Append-only CSV training log.
    std::optional<std::filesystem::path> log_path;
    /// On a non-finite loss, the checkpoint from the last completed epoch is
    /// written here before the error propagates.
    std::optional<std::filesystem::path> last_good_path;
    std::function<void(const TrainLogRow&)> on_batch;
};

struct DecouplerTrainResult {
    Decoupler decoupler;
    brain::BrainModel brain;  // prior / motion / text head co-trained
    Checkpoint checkpoint;
    std::vector<TrainLogRow> log;
    std::vector<LossValues> epoch_losses;
};

/// Loss values for a batch; when `accumulate` is set, parameter gradients
/// of the decoupler and brain model are accumulated with the given weights.
LossValues decoupler_batch(Decoupler& dec, brain::BrainModel& brain, const Mat& voxels,
                           const std::vector<const SampleTargets*>& targets,
                           const LossWeights& weights, bool accumulate);

DecouplerTrainResult train_decoupler(const Dataset& dataset, const Checkpoint& brain_ckpt,
                                     const ExperimentConfig& cfg,
                                     const brain::FrozenEncoderTargets& encoder,
                                     const LatentCodec& codec,
                                     const DecouplerTrainOptions& options = {});

inline constexpr const char* kLogHeader =
    "epoch,batch,w1,w2,w3,w4,L_seg,L_cls,L_txt,L_rec,L_total";

}  // namespace neurons::decoupler
