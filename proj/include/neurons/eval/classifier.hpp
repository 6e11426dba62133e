#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurons/common/image.hpp"
#include "neurons/common/nn.hpp"

namespace neurons::eval {

/// Video/image classifier over a fixed label set. A single image is scored
/// as a one-frame video. Returned probabilities sum to 1.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;
    virtual RowVec class_probs(const Video& video) const = 0;
    virtual int num_labels() const = 0;

    RowVec class_probs(const Image& frame) const { return class_probs(Video{frame}); }
};

/// Seeded projection of pooled appearance (8x8 mean frame) and motion (8x8
/// mean absolute frame difference) features to `labels` logits, then a
/// softmax. Labels are "class_00" .. "class_NN".
class StubClassifier : public ClassifierBackend {
public:
    StubClassifier(int labels, std::uint64_t seed, double temperature = 0.05);
    using ClassifierBackend::class_probs;
    RowVec class_probs(const Video& video) const override;
    int num_labels() const override { return static_cast<int>(projection_.cols()); }
    std::vector<std::string> label_names() const;

    static constexpr int kGrid = 8;

private:
    Mat projection_;  // (2 * 8 * 8 * 3) x labels
    double temperature_;
};

}  // namespace neurons::eval
