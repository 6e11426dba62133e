#include "neurons/eval/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "neurons/common/error.hpp"

namespace neurons::eval {

double nway_topk(const RowVec& gt_probs, const RowVec& pred_probs, int n, int k, int repeats,
                 std::uint64_t seed) {
    const auto labels = static_cast<int>(gt_probs.size());
    require_shape(pred_probs.size() == gt_probs.size(), "probability vectors differ in length");
    if (n < 2) throw DomainError("N-way test needs N >= 2");
    if (k < 1 || k >= n) throw DomainError("top-K needs 1 <= K < N");
    if (n > labels) {
        throw DomainError("N=" + std::to_string(n) + " exceeds the label set size " +
                          std::to_string(labels));
    }
    if (repeats < 1) throw DomainError("repeats must be positive");

    Eigen::Index gt = 0;
    gt_probs.maxCoeff(&gt);
    std::vector<int> others;
    for (int c = 0; c < labels; ++c)
        if (c != gt) others.push_back(c);

    std::mt19937_64 rng(seed);
    int hits = 0;
    for (int r = 0; r < repeats; ++r) {
        // partial Fisher-Yates: the first n-1 entries are the distractors
        for (int i = 0; i < n - 1; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(others.size()) - 1);
            std::swap(others[static_cast<std::size_t>(i)], others[static_cast<std::size_t>(pick(rng))]);
        }
        const double p = pred_probs(gt);
        int above = 0, tied = 0;
        for (int i = 0; i < n - 1; ++i) {
            const double q = pred_probs(others[static_cast<std::size_t>(i)]);
            above += q > p;
            tied += q == p;
        }
        const int slot = std::uniform_int_distribution<int>(0, tied)(rng);
        hits += above + slot < k;
    }
    return static_cast<double>(hits) / repeats;
}

PccResult clip_pcc(const Mat& emb) {
    if (emb.rows() < 2) throw DomainError("CLIP-pcc needs at least two frames");
    PccResult r;
    double sum = 0;
    for (Eigen::Index f = 0; f + 1 < emb.rows(); ++f) {
        const double na = emb.row(f).norm(), nb = emb.row(f + 1).norm();
        if (na == 0 || nb == 0) {
            ++r.excluded;
            continue;
        }
        sum += emb.row(f).dot(emb.row(f + 1)) / (na * nb);
        ++r.pairs;
    }
    r.score = r.pairs ? sum / r.pairs : 0.0;
    return r;
}

PccResult clip_pcc(const Video& video, const brain::FrozenEncoderTargets& embedder) {
    return clip_pcc(embedder.video_embed(video));
}

PsnrResult psnr(const Image& a, const Image& b) {
    require_shape(a.same_shape(b), "psnr inputs differ in shape");
    double mse = 0;
    for (std::size_t i = 0; i < a.size(); ++i) mse += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    mse /= static_cast<double>(a.size());
    if (mse == 0) return {kPsnrCap, true};
    return {std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse)), false};
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::array<double, kWin> gaussian_window() {
    std::array<double, kWin> w{};
    double s = 0;
    for (int i = 0; i < kWin; ++i) {
        const double x = i - kWin / 2;
        s += w[static_cast<std::size_t>(i)] = std::exp(-x * x / (2 * kSigma * kSigma));
    }
    for (double& v : w) v /= s;
    return w;
}

// Separable 'valid' Gaussian filter of one channel.
Mat filter_valid(const Mat& x) {
    static const auto w = gaussian_window();
    const Eigen::Index oh = x.rows() - kWin + 1, ow = x.cols() - kWin + 1;
    Mat rows = Mat::Zero(x.rows(), ow);
    for (Eigen::Index c = 0; c < ow; ++c)
        for (int i = 0; i < kWin; ++i) rows.col(c) += w[static_cast<std::size_t>(i)] * x.col(c + i);
    Mat out = Mat::Zero(oh, ow);
    for (Eigen::Index r = 0; r < oh; ++r)
        for (int i = 0; i < kWin; ++i) out.row(r) += w[static_cast<std::size_t>(i)] * rows.row(r + i);
    return out;
}

Mat channel(const Image& img, int c) {
    Mat m(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) m(y, x) = img.at(y, x, c);
    return m;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    require_shape(a.same_shape(b), "ssim inputs differ in shape");
    require_shape(a.height >= kWin && a.width >= kWin, "ssim needs images of at least 11x11");
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0;
    for (int c = 0; c < a.channels; ++c) {
        const Mat x = channel(a, c), y = channel(b, c);
        const Mat mx = filter_valid(x), my = filter_valid(y);
        const Mat sxx = filter_valid(x.cwiseProduct(x)) - mx.cwiseProduct(mx);
        const Mat syy = filter_valid(y.cwiseProduct(y)) - my.cwiseProduct(my);
        const Mat sxy = filter_valid(x.cwiseProduct(y)) - mx.cwiseProduct(my);
        const auto num = (2 * mx.array() * my.array() + c1) * (2 * sxy.array() + c2);
        const auto den = (mx.array().square() + my.array().square() + c1) * (sxx.array() + syy.array() + c2);
        total += (num / den).mean();
    }
    return total / a.channels;
}

DiceResult dice(const Image& pred, const Image& gt) {
    require_shape(pred.same_shape(gt), "dice inputs differ in shape");
    if (!is_binary(pred) || !is_binary(gt)) throw DomainError("dice needs binary masks");
    double inter = 0, sa = 0, sb = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        inter += pred.data[i] * gt.data[i];
        sa += pred.data[i];
        sb += gt.data[i];
    }
    if (sa + sb == 0) return {1.0, true};
    return {2 * inter / (sa + sb), false};
}

}  // namespace neurons::eval
