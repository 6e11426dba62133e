#pragma once

#include <vector>

#include "neurons/common/nn.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::brain {

/// Per-sample MixCo coefficients: x*_c = lambda_c x_c + (1 - lambda_c) x_{m_c}.
struct MixState {
    std::vector<double> lambda;
    std::vector<int> partner;

    std::size_t size() const { return lambda.size(); }
    /// lambda = 1 everywhere; partners are the next row (or self for size 1).
    static MixState identity(std::size_t n);
    /// Repeats every sample's state across `frames` consecutive rows, with the
    /// partner of row (b, f) being row (m_b, f).
    MixState expand_to_frames(int frames) const;
};

/// lambda ~ Beta(alpha, alpha), partner uniform over the other samples.
MixState sample_mix_state(Rng& rng, std::size_t batch, double alpha);

/// Rows of `x` mixed with their partners.
Mat mixco_mix(const Mat& x, const MixState& state);

/// Bidirectional MixCo InfoNCE over cosine similarities of the rows of `emb`
/// and `targets`. Both directions carry a 1/(2R) factor for R rows. If `grad`
/// is given it receives dL/d(emb); the targets are treated as constants.
double bimixco_loss(const Mat& emb, const Mat& targets, const MixState& state, double tau,
                    Mat* grad = nullptr);

/// Plain symmetric InfoNCE (BiMixCo with lambda = 1).
double clip_text_loss(const Mat& emb, const Mat& targets, double tau, Mat* grad = nullptr);

/// Mean squared elementwise difference.
double prior_loss(const Mat& predicted, const Mat& target, Mat* grad = nullptr);

}  // namespace neurons::brain
