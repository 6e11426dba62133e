#pragma once

#include <cstdint>
#include <string>

#include "neurons/common/nn.hpp"
#include "neurons/common/params.hpp"
#include "neurons/harness/checkpoint.hpp"

namespace neurons::brain {

struct BrainDims {
    int voxels = 2048;
    int hidden = 128;
    int mlp_blocks = 2;
    int tokens = 4;       // N
    int width = 32;       // C
    int text_tokens = 4;  // N_t
    int frames = 6;       // F

    int image_dim() const { return tokens * width; }
    int text_dim() const { return text_tokens * width; }
};

/// Embeddings for a batch of B samples, flattened row-major per token:
///   e_img: B x (N*C), e_vid: (B*F) x (N*C) with row b*F + f, e_txt: B x (N_t*C).
struct EmbeddingBundle {
    Mat e_img;
    Mat e_vid;
    Mat e_txt;
    int frames = 0;

    Eigen::Index batch() const { return e_img.rows(); }
    /// Frame-axis mean of e_vid, B x (N*C).
    Mat frame_mean() const;
    /// Tokens of one frame as an N x C matrix.
    Mat vid_tokens(Eigen::Index b, int f, int width) const;
};

/// Affine voxel-to-hidden map.
Mat ridge_map(const Mat& voxels, const Mat& weight, const RowVec& bias);

/// Intermediate activations kept for the backward pass.
struct BrainCache {
    Mat x;
    std::vector<Mat> h;    // h[0] = ridge output, h[k+1] = h[k] + silu(a[k])
    std::vector<Mat> a;    // residual-block pre-activations
    Mat back;              // backbone embedding before the prior
    Mat prior_pre;         // prior hidden pre-activation
    EmbeddingBundle out;
};

/// ridge -> residual MLP -> backbone head -> residual prior MLP (e_img)
/// -> per-frame motion projection (e_vid) -> frame-mean text head (e_txt).
class BrainModel {
public:
    BrainModel() = default;
    BrainModel(const BrainDims& dims, std::uint64_t seed);

    bool initialized() const { return initialized_; }
    const BrainDims& dims() const { return dims_; }

    EmbeddingBundle forward(const Mat& voxels) const;
    BrainCache forward_cached(const Mat& voxels) const;
    /// Accumulates parameter gradients given dL/d(e_vid) and dL/d(e_txt).
    /// Either upstream gradient may be empty (treated as zero).
    void backward(const BrainCache& cache, const Mat& grad_vid, const Mat& grad_txt);

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    /// Writes parameters ("brain.<name>") and dims into a checkpoint.
    void store(Checkpoint& ckpt) const;
    static BrainModel restore(const Checkpoint& ckpt);

private:
    void require_initialized() const;

    BrainDims dims_;
    ParamSet params_;
    bool initialized_ = false;
};

}  // namespace neurons::brain
