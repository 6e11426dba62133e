#pragma once

#include <array>
#include <vector>

#include "neurons/common/nn.hpp"

namespace neurons::decoupler {

/// softmax(q k^T / sqrt(d)) v with d = q.cols(). `attention`, if given,
/// receives the row-stochastic weight matrix.
Mat cross_attend(const Mat& q, const Mat& k, const Mat& v, Mat* attention = nullptr);

struct AttentionGrads {
    Mat dq, dk, dv;
};
AttentionGrads cross_attend_backward(const Mat& q, const Mat& k, const Mat& v, const Mat& grad_out);

inline constexpr double kBceEps = 1e-7;

/// Pixel-averaged binary cross-entropy, averaged over rows (one row per
/// frame). `pred` holds probabilities, clamped to [eps, 1 - eps].
double seg_loss(const Mat& pred, const Mat& gt, Mat* grad = nullptr);

/// Multi-label loss: mean over rows and classes of sigmoid BCE on logits.
double cls_loss(const Mat& logits, const Mat& concepts, Mat* grad = nullptr);

/// Mean negative log-likelihood of `targets[i]` under row i of `logits`.
double txt_loss(const Mat& logits, const std::vector<int>& targets, Mat* grad = nullptr);

/// Mean absolute error (per-frame means averaged over frames equals the
/// global mean for equal-sized frames).
double rec_loss(const Mat& pred, const Mat& target, Mat* grad = nullptr);

/// Progressive sine schedule: w = 1 + 9|sin(pi C / T)| with T = P*N_B and
/// C = (E - S)*N_B + B inside the period [S, S + P); 1 outside it.
double schedule_weight(int epoch, int batch, int batches_per_epoch, int period_start,
                       int period_epochs);

/// Weights in task order (seg, cls, txt, rec).
using LossWeights = std::array<double, 4>;
using LossValues = std::array<double, 4>;

LossWeights scheduled_weights(int epoch, int batch, int batches_per_epoch,
                              const std::array<int, 4>& period_starts, int period_epochs);

/// w1 L_seg + w2 L_cls + w3 L_txt + w4 L_rec; non-finite inputs raise NumericError.
double total_loss(const LossValues& losses, const LossWeights& weights);

}  // namespace neurons::decoupler
