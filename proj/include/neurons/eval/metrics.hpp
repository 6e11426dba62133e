#pragma once

#include <cstdint>

#include "neurons/brain/frozen_encoder.hpp"
#include "neurons/common/image.hpp"
#include "neurons/common/nn.hpp"

namespace neurons::eval {

/// N-way top-K success rate. Each repeat draws N-1 distractor classes
/// (uniformly, without replacement, never the ground-truth class) and
/// succeeds when the ground-truth class is among the K most probable
/// candidates under `pred_probs`. Ties are broken uniformly at random.
/// The ground-truth class is argmax(gt_probs).
double nway_topk(const RowVec& gt_probs, const RowVec& pred_probs, int n, int k, int repeats,
                 std::uint64_t seed);

struct PccResult {
    double score = 0;
    int pairs = 0;
    int excluded = 0;  // adjacent pairs dropped for a zero-norm embedding
};

/// Mean cosine similarity of adjacent rows.
PccResult clip_pcc(const Mat& frame_embeddings);
PccResult clip_pcc(const Video& video, const brain::FrozenEncoderTargets& embedder);

inline constexpr double kPsnrCap = 100.0;

struct PsnrResult {
    double db = 0;
    bool capped = false;  // identical inputs
};

/// 10 log10(1 / MSE) for images in [0,1], capped at kPsnrCap.
PsnrResult psnr(const Image& a, const Image& b);

/// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03, range 1) over
/// the valid region, averaged across channels.
double ssim(const Image& a, const Image& b);

struct DiceResult {
    double score = 0;
    bool both_empty = false;
};

/// 2|A n B| / (|A| + |B|) for binary masks; 1 when both are empty.
DiceResult dice(const Image& pred, const Image& gt);

}  // namespace neurons::eval
