#pragma once

#include <cstdint>
#include <string>

#include "neurons/common/image.hpp"
#include "neurons/common/nn.hpp"

namespace neurons::brain {

/// Frozen vision/text encoder supplying alignment targets. Every token row is
/// unit-normalised along the channel axis.
class FrozenEncoderTargets {
public:
    virtual ~FrozenEncoderTargets() = default;

    /// One row of N*C values (row-major N x C tokens) for a single frame.
    virtual RowVec image_embed(const Image& frame) const = 0;
    /// F x (N*C), one row per frame.
    virtual Mat video_embed(const Video& clip) const;
    /// 1 x (N_t*C).
    virtual RowVec text_embed(const std::string& text) const = 0;

    virtual int tokens() const = 0;
    virtual int text_tokens() const = 0;
    virtual int width() const = 0;
};

/// Deterministic stand-in: frames are average-pooled to an 8x8 grid and
/// pushed through a seeded random orthogonal projection; text slots sum
/// seeded per-word vectors. Tokens are then unit-normalised.
class StubFrozenEncoder : public FrozenEncoderTargets {
public:
    StubFrozenEncoder(int tokens, int text_tokens, int width, std::uint64_t seed);

    RowVec image_embed(const Image& frame) const override;
    RowVec text_embed(const std::string& text) const override;

    int tokens() const override { return tokens_; }
    int text_tokens() const override { return text_tokens_; }
    int width() const override { return width_; }

    static constexpr int kGrid = 8;

private:
    int tokens_;
    int text_tokens_;
    int width_;
    Mat projection_;              // (8*8*3) x (N*C), orthonormal columns
    std::vector<Mat> word_tables_;  // per text slot: vocab x C
};

/// Unit-normalises each C-wide token of a flattened row.
RowVec normalize_tokens(const RowVec& row, int width);

}  // namespace neurons::brain
