#include "neurons/eval/classifier.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::eval {

namespace {

constexpr int kFeat = StubClassifier::kGrid * StubClassifier::kGrid * 3;

RowVec pooled(const Image& img) {
    require_shape(img.channels == 3 && img.height % StubClassifier::kGrid == 0 &&
                      img.width % StubClassifier::kGrid == 0,
                  "classifier needs RGB frames divisible by 8");
    const Image p = img.height == StubClassifier::kGrid && img.width == StubClassifier::kGrid
                        ? img
                        : avg_pool(img, img.height / StubClassifier::kGrid);
    RowVec out(kFeat);
    for (std::size_t i = 0; i < p.size(); ++i) out(static_cast<Eigen::Index>(i)) = p.data[i];
    return out;
}

}  // namespace

StubClassifier::StubClassifier(int labels, std::uint64_t seed, double temperature)
    : temperature_(temperature) {
    if (labels < 2) throw DomainError("classifier needs at least two labels");
    if (!(temperature > 0)) throw DomainError("temperature must be positive");
    Rng rng = make_rng(seed, "eval.classifier");
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(kFeat)));
    projection_.resize(2 * kFeat, labels);
    for (Eigen::Index i = 0; i < projection_.size(); ++i) projection_.data()[i] = n(rng);
}

RowVec StubClassifier::class_probs(const Video& video) const {
    if (video.empty()) throw DomainError("cannot classify an empty video");
    RowVec appearance = RowVec::Zero(kFeat), motion = RowVec::Zero(kFeat);
    RowVec prev;
    for (const auto& f : video) {
        const RowVec p = pooled(f);
        appearance += p;
        if (prev.size()) motion += (p - prev).cwiseAbs();
        prev = p;
    }
    appearance /= static_cast<double>(video.size());
    if (video.size() > 1) motion /= static_cast<double>(video.size() - 1);
    RowVec feat(2 * kFeat);
    feat << appearance.array() - 0.5, motion;
    RowVec logits = feat * projection_ / temperature_;
    logits.array() -= logits.maxCoeff();
    RowVec p = logits.array().exp();
    return p / p.sum();
}

std::vector<std::string> StubClassifier::label_names() const {
    std::vector<std::string> out;
    for (int i = 0; i < num_labels(); ++i) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "class_%02d", i);
        out.emplace_back(buf);
    }
    return out;
}

}  // namespace neurons::eval
