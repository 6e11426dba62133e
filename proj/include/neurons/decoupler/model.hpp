#pragma once

#include <cstdint>
#include <vector>

#include "neurons/common/nn.hpp"
#include "neurons/common/params.hpp"
#include "neurons/harness/checkpoint.hpp"

namespace neurons::decoupler {

struct DecouplerDims {
    int tokens = 4;        // N
    int width = 32;        // C
    int text_tokens = 4;   // N_t
    int attn = 32;         // d
    int channels = 8;      // trunk feature channels G
    int seg_size = 16;     // H/4; the trunk grid
    int latent_channels = 4;
    int concepts = 51;
    int vocab = 512;
    int text_hidden = 64;
    int frames = 6;

    int latent_size() const { return seg_size / 2; }
    int grid_pixels() const { return seg_size * seg_size; }
    int latent_dim() const { return latent_size() * latent_size() * latent_channels; }
};

/// Activations of the shared text-driven decoder trunk for R frame rows.
struct TrunkCache {
    Mat vid;   // R x (N*C) frame embeddings
    Mat txt;   // R x (N_t*C) conditioning text embeddings
    Mat z;     // R x (N*C): frame tokens + cross-attention output
    Mat u;     // R x (P*G) pre-activation
    Mat feat;  // R x (P*G) SiLU features, pixel-major
};

struct TextCache {
    RowVec prefix;
    std::vector<int> inputs;
    std::vector<RowVec> h;  // h[0] from the prefix, h[i+1] after inputs[i]
    Mat logits;             // one row per predicted token
};

/// The four decoupled heads plus the shared segmentation/reconstruction
/// trunk. Head parameters are disjoint: "seg.", "rec.", "cls.", "txt.";
/// "attn." and "trunk." are shared by the seg and rec paths.
class Decoupler {
public:
    Decoupler() = default;
    Decoupler(const DecouplerDims& dims, std::uint64_t seed);

    const DecouplerDims& dims() const { return dims_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    /// Frame- and token-mean of e_vid ((B*F) x (N*C)) -> B x C.
    Mat pool(const Mat& e_vid) const;
    Mat classify(const Mat& e_vid) const;
    /// Accumulates head gradients and returns dL/d(e_vid).
    Mat classify_backward(const Mat& e_vid, const Mat& grad_logits);

    /// e_seg for one frame: tokens attend over the text tokens.
    Mat attend(const Mat& frame_tokens, const Mat& text_tokens) const;

    TrunkCache trunk_forward(const Mat& vid_rows, const Mat& txt_rows) const;
    /// Accumulates trunk gradients; adds into grad_vid / grad_txt.
    void trunk_backward(const TrunkCache& cache, const Mat& grad_feat, Mat& grad_vid,
                        Mat& grad_txt);

    /// Mask probabilities, R x (S*S) row-major.
    Mat seg_head(const TrunkCache& cache) const;
    Mat seg_head_backward(const TrunkCache& cache, const Mat& grad_prob);
    /// Latents, R x (L*L*C_l) pixel-major interleaved.
    Mat rec_head(const TrunkCache& cache) const;
    Mat rec_head_backward(const TrunkCache& cache, const Mat& grad_latent);

    Mat seg_forward(const Mat& vid_rows, const Mat& txt_rows) const {
        return seg_head(trunk_forward(vid_rows, txt_rows));
    }
    Mat rec_forward(const Mat& vid_rows, const Mat& txt_rows) const {
        return rec_head(trunk_forward(vid_rows, txt_rows));
    }

    /// Teacher-forced pass over [bos, ..., eos]; row i of the logits predicts
    /// tokens[i + 1] from tokens[0..i] and the prefix.
    TextCache text_forward(const RowVec& e_txt, const std::vector<int>& tokens) const;
    RowVec text_backward(const TextCache& cache, const Mat& grad_logits);
    /// Greedy decode; stops at eos or after `max_len` tokens (then sets
    /// `truncated`). Returned ids exclude bos/eos.
    std::vector<int> greedy_decode(const RowVec& e_txt, int max_len, bool* truncated) const;

    void store(Checkpoint& ckpt) const;
    static Decoupler restore(const Checkpoint& ckpt);

private:
    DecouplerDims dims_;
    ParamSet params_;
};

}  // namespace neurons::decoupler
