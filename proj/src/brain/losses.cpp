#include "neurons/brain/losses.hpp"

#include <cmath>

#include "neurons/common/error.hpp"

namespace neurons::brain {

MixState MixState::identity(std::size_t n) {
    MixState s;
    s.lambda.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) s.partner.push_back(static_cast<int>((i + 1) % n));
    return s;
}

MixState MixState::expand_to_frames(int frames) const {
    MixState out;
    for (std::size_t b = 0; b < size(); ++b)
        for (int f = 0; f < frames; ++f) {
            out.lambda.push_back(lambda[b]);
            out.partner.push_back(partner[b] * frames + f);
        }
    return out;
}

MixState sample_mix_state(Rng& rng, std::size_t batch, double alpha) {
    if (batch < 2) throw DomainError("mixing needs at least two samples");
    MixState s;
    for (std::size_t i = 0; i < batch; ++i) {
        s.lambda.push_back(sample_beta(rng, alpha, alpha));
        std::uniform_int_distribution<std::size_t> pick(0, batch - 2);
        std::size_t p = pick(rng);
        if (p >= i) ++p;
        s.partner.push_back(static_cast<int>(p));
    }
    return s;
}

namespace {

void check_state(const MixState& state, Eigen::Index rows) {
    require_shape(static_cast<Eigen::Index>(state.size()) == rows &&
                      state.partner.size() == state.lambda.size(),
                  "mix state does not match batch size");
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double l = state.lambda[i];
        if (!(l >= 0.0 && l <= 1.0)) throw DomainError("mixing coefficient outside [0,1]");
        const int p = state.partner[i];
        if (p < 0 || p >= rows) throw DomainError("partner index out of range");
        if (rows > 1 && p == static_cast<int>(i)) throw DomainError("partner equals self");
    }
}

// Soft target matrix: Y(i,i) = lambda_i, Y(i, m_i) += 1 - lambda_i.
Mat soft_targets(const MixState& state) {
    const auto n = static_cast<Eigen::Index>(state.size());
    Mat y = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, i) += state.lambda[static_cast<std::size_t>(i)];
        y(i, state.partner[static_cast<std::size_t>(i)]) +=
            1.0 - state.lambda[static_cast<std::size_t>(i)];
    }
    return y;
}

double soft_infonce(const Mat& emb, const Mat& targets, const Mat& y, double tau, Mat* grad) {
    if (!(tau > 0)) throw DomainError("temperature must be positive");
    require_shape(emb.rows() == targets.rows() && emb.cols() == targets.cols(),
                  "embeddings and targets differ in shape");
    require_shape(emb.rows() >= 1, "empty batch");
    const Mat e = normalize_rows(emb);
    const Mat t = normalize_rows(targets);
    const Mat s = e * t.transpose() / tau;
    const auto r = static_cast<double>(s.rows());

    const Vec row_lse = row_logsumexp(s);
    const Vec col_lse = row_logsumexp(s.transpose());
    Mat log_row = s.colwise() - row_lse;
    Mat log_col = s.rowwise() - col_lse.transpose();
    const double loss = -((y.array() * log_row.array()).sum() +
                          (y.array() * log_col.array()).sum()) /
                        (2.0 * r);

    if (grad) {
        const Mat p_row = log_row.array().exp();
        const Mat p_col = log_col.array().exp();
        const Vec y_row = y.rowwise().sum();
        const RowVec y_col = y.colwise().sum();
        Mat ds = (p_row.array().colwise() * y_row.array()).matrix() - y;
        ds += (p_col.array().rowwise() * y_col.array()).matrix() - y;
        ds /= 2.0 * r;
        const Mat de = ds * t / tau;
        *grad = normalize_rows_backward(emb, de);
    }
    return loss;
}

}  // namespace

Mat mixco_mix(const Mat& x, const MixState& state) {
    check_state(state, x.rows());
    Mat out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double l = state.lambda[static_cast<std::size_t>(i)];
        out.row(i) = l * x.row(i) + (1.0 - l) * x.row(state.partner[static_cast<std::size_t>(i)]);
    }
    return out;
}

double bimixco_loss(const Mat& emb, const Mat& targets, const MixState& state, double tau,
                    Mat* grad) {
    check_state(state, emb.rows());
    return soft_infonce(emb, targets, soft_targets(state), tau, grad);
}

double clip_text_loss(const Mat& emb, const Mat& targets, double tau, Mat* grad) {
    return soft_infonce(emb, targets, Mat::Identity(emb.rows(), emb.rows()), tau, grad);
}

double prior_loss(const Mat& predicted, const Mat& target, Mat* grad) {
    require_shape(predicted.rows() == target.rows() && predicted.cols() == target.cols(),
                  "prior prediction and target differ in shape");
    require_shape(predicted.size() > 0, "empty prior tensors");
    const Mat diff = predicted - target;
    const double n = static_cast<double>(diff.size());
    if (grad) *grad = 2.0 * diff / n;
    return diff.squaredNorm() / n;
}

}  // namespace neurons::brain
