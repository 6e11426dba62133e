#pragma once

#include <cstdint>

#include "neurons/common/image.hpp"
#include "neurons/common/nn.hpp"

namespace neurons::decoupler {

/// Pluggable image <-> latent map with an 8x spatial reduction. Latents are
/// Images whose channel count is the latent width.
class LatentCodec {
public:
    virtual ~LatentCodec() = default;
    virtual Image encode(const Image& frame) const = 0;
    virtual Image decode(const Image& latent, int height, int width) const = 0;
    virtual int channels() const = 0;
    static constexpr int kFactor = 8;
};

/// 8x block average followed by a seeded per-pixel linear map RGB -> C_l.
/// Decoding applies the pseudo-inverse and bilinear upsampling.
class StubLatentCodec : public LatentCodec {
public:
    StubLatentCodec(int channels, std::uint64_t seed);

    Image encode(const Image& frame) const override;
    Image decode(const Image& latent, int height, int width) const override;
    int channels() const override { return static_cast<int>(map_.rows()); }

private:
    Mat map_;      // C_l x 3
    Mat inverse_;  // 3 x C_l
};

}  // namespace neurons::decoupler
