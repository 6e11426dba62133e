#include "neurons/brain/frozen_encoder.hpp"

#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/tasks/tokenizer.hpp"

namespace neurons::brain {

namespace {

Mat gaussian(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

}  // namespace

Mat FrozenEncoderTargets::video_embed(const Video& clip) const {
    Mat out(static_cast<Eigen::Index>(clip.size()), tokens() * width());
    for (std::size_t f = 0; f < clip.size(); ++f)
        out.row(static_cast<Eigen::Index>(f)) = image_embed(clip[f]);
    return out;
}

RowVec normalize_tokens(const RowVec& row, int width) {
    require_shape(width > 0 && row.size() % width == 0, "row is not a whole number of tokens");
    RowVec out = row;
    for (Eigen::Index t = 0; t < row.size() / width; ++t) {
        const double n = row.segment(t * width, width).norm();
        if (n > 0) out.segment(t * width, width) /= n;
    }
    return out;
}

StubFrozenEncoder::StubFrozenEncoder(int tokens, int text_tokens, int width, std::uint64_t seed)
    : tokens_(tokens), text_tokens_(text_tokens), width_(width) {
    if (tokens <= 0 || text_tokens <= 0 || width <= 0) {
        throw ConfigError("encoder dimensions must be positive");
    }
    const int in_dim = kGrid * kGrid * 3;
    const int out_dim = tokens * width;
    Rng rng = make_rng(seed, "encoder.image");
    if (out_dim <= in_dim) {
        Eigen::HouseholderQR<Mat> qr(gaussian(rng, in_dim, out_dim));
        projection_ = qr.householderQ() * Mat::Identity(in_dim, out_dim);
    } else {
        // More outputs than inputs: orthonormal rows instead.
        Eigen::HouseholderQR<Mat> qr(gaussian(rng, out_dim, in_dim));
        projection_ = (qr.householderQ() * Mat::Identity(out_dim, in_dim)).transpose();
    }
    Rng text_rng = make_rng(seed, "encoder.text");
    const int vocab = tasks::Tokenizer::standard().size();
    for (int s = 0; s < text_tokens; ++s) word_tables_.push_back(gaussian(text_rng, vocab, width));
}

RowVec StubFrozenEncoder::image_embed(const Image& frame) const {
    if (frame.channels != 3 || frame.height % kGrid != 0 || frame.width % kGrid != 0 ||
        frame.height != frame.width) {
        throw ShapeError("encoder expects square RGB frames with sides divisible by 8");
    }
    const Image pooled = avg_pool(frame, frame.height / kGrid);
    RowVec x(static_cast<Eigen::Index>(pooled.size()));
    for (std::size_t i = 0; i < pooled.size(); ++i)
        x(static_cast<Eigen::Index>(i)) = pooled.data[i] - 0.5;
    return normalize_tokens(x * projection_, width_);
}

RowVec StubFrozenEncoder::text_embed(const std::string& text) const {
    const auto& tok = tasks::Tokenizer::standard();
    RowVec out = RowVec::Zero(text_tokens_ * width_);
    std::istringstream in(text);
    std::string word;
    int position = 0;
    while (in >> word) {
        const int id = tok.id_of(word);
        for (int s = 0; s < text_tokens_; ++s) {
            // Slot s weights word positions differently so word order matters.
            const double w = 1.0 + 0.5 * std::cos(0.7 * (s + 1) * position);
            out.segment(s * width_, width_) += w * word_tables_[static_cast<std::size_t>(s)].row(id);
        }
        ++position;
    }
    if (position == 0) throw DomainError("cannot embed empty text");
    return normalize_tokens(out, width_);
}

}  // namespace neurons::brain
