#include "neurons/decoupler/layers.hpp"

#include <cmath>
#include <numbers>

#include "neurons/common/error.hpp"

namespace neurons::decoupler {

Mat cross_attend(const Mat& q, const Mat& k, const Mat& v, Mat* attention) {
    require_shape(q.cols() == k.cols(), "query and key widths differ");
    require_shape(k.rows() == v.rows(), "key and value token counts differ");
    require_shape(k.rows() >= 1, "no key tokens");
    const Mat a = row_softmax(q * k.transpose() / std::sqrt(static_cast<double>(q.cols())));
    if (attention) *attention = a;
    return a * v;
}

AttentionGrads cross_attend_backward(const Mat& q, const Mat& k, const Mat& v,
                                     const Mat& grad_out) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Mat a;
    cross_attend(q, k, v, &a);
    AttentionGrads g;
    g.dv = a.transpose() * grad_out;
    const Mat da = grad_out * v.transpose();
    const Vec inner = (da.cwiseProduct(a)).rowwise().sum();
    const Mat ds = (a.array() * (da.colwise() - inner).array()).matrix() * scale;
    g.dq = ds * k;
    g.dk = ds.transpose() * q;
    return g;
}

double seg_loss(const Mat& pred, const Mat& gt, Mat* grad) {
    require_shape(pred.rows() == gt.rows() && pred.cols() == gt.cols(),
                  "mask prediction and target differ in shape");
    require_shape(pred.size() > 0, "empty masks");
    const double n = static_cast<double>(pred.size());
    double total = 0;
    if (grad) grad->resize(pred.rows(), pred.cols());
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double y = gt.data()[i];
        if (y != 0.0 && y != 1.0) throw DomainError("segmentation targets must be 0 or 1");
        const double raw = pred.data()[i];
        const double p = std::clamp(raw, kBceEps, 1.0 - kBceEps);
        total -= y * std::log(p) + (1 - y) * std::log(1 - p);
        if (grad) {
            const bool clamped = raw < kBceEps || raw > 1.0 - kBceEps;
            grad->data()[i] = clamped ? 0.0 : (-y / p + (1 - y) / (1 - p)) / n;
        }
    }
    return total / n;
}

double cls_loss(const Mat& logits, const Mat& concepts, Mat* grad) {
    require_shape(logits.rows() == concepts.rows() && logits.cols() == concepts.cols(),
                  "concept vector has the wrong length");
    const double n = static_cast<double>(logits.size());
    double total = 0;
    if (grad) grad->resize(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double x = logits.data()[i];
        const double y = concepts.data()[i];
        // log(1 + e^x) - y x, written to avoid overflow
        total += std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) - y * x;
        if (grad) grad->data()[i] = (sigmoid(x) - y) / n;
    }
    return total / n;
}

double txt_loss(const Mat& logits, const std::vector<int>& targets, Mat* grad) {
    if (targets.empty()) throw DomainError("empty token sequence");
    require_shape(logits.rows() == static_cast<Eigen::Index>(targets.size()),
                  "one logit row per target token expected");
    const Vec lse = row_logsumexp(logits);
    const double n = static_cast<double>(targets.size());
    double total = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const int t = targets[i];
        if (t < 0 || t >= logits.cols()) throw DomainError("token id outside the vocabulary");
        total += lse(static_cast<Eigen::Index>(i)) - logits(static_cast<Eigen::Index>(i), t);
    }
    if (grad) {
        *grad = row_softmax(logits);
        for (std::size_t i = 0; i < targets.size(); ++i)
            (*grad)(static_cast<Eigen::Index>(i), targets[i]) -= 1.0;
        *grad /= n;
    }
    return total / n;
}

double rec_loss(const Mat& pred, const Mat& target, Mat* grad) {
    require_shape(pred.rows() == target.rows() && pred.cols() == target.cols(),
                  "latent prediction and target differ in shape");
    require_shape(pred.size() > 0, "empty latents");
    const Mat diff = pred - target;
    const double n = static_cast<double>(diff.size());
    if (grad) *grad = diff.unaryExpr([n](double d) { return (d > 0) - (d < 0) + 0.0; }) / n;
    return diff.cwiseAbs().sum() / n;
}

double schedule_weight(int epoch, int batch, int batches_per_epoch, int period_start,
                       int period_epochs) {
    if (batches_per_epoch < 1 || period_epochs < 1 || batch < 0 || batch >= batches_per_epoch) {
        throw DomainError("schedule needs N_B >= 1, P >= 1 and 0 <= B < N_B");
    }
    if (epoch < period_start || epoch >= period_start + period_epochs) return 1.0;
    const double t = static_cast<double>(period_epochs) * batches_per_epoch;
    const double c = static_cast<double>(epoch - period_start) * batches_per_epoch + batch;
    return 1.0 + 9.0 * std::abs(std::sin(c / t * std::numbers::pi));
}

LossWeights scheduled_weights(int epoch, int batch, int batches_per_epoch,
                              const std::array<int, 4>& period_starts, int period_epochs) {
    LossWeights w;
    for (std::size_t k = 0; k < 4; ++k)
        w[k] = schedule_weight(epoch, batch, batches_per_epoch, period_starts[k], period_epochs);
    return w;
}

double total_loss(const LossValues& losses, const LossWeights& weights) {
    double total = 0;
    for (std::size_t k = 0; k < 4; ++k) {
        if (!std::isfinite(losses[k]) || !std::isfinite(weights[k])) {
            throw NumericError("non-finite loss term " + std::to_string(k + 1));
        }
        total += weights[k] * losses[k];
    }
    return total;
}

}  // namespace neurons::decoupler
