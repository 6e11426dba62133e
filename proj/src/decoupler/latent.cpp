#include "neurons/decoupler/latent.hpp"

#include <algorithm>

#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::decoupler {

StubLatentCodec::StubLatentCodec(int channels, std::uint64_t seed) {
    if (channels < 3) throw ConfigError("latent codec needs at least 3 channels");
    Rng rng = make_rng(seed, "latent.codec");
    std::normal_distribution<double> n(0.0, 1.0);
    map_.resize(channels, 3);
    for (Eigen::Index i = 0; i < map_.size(); ++i) map_.data()[i] = n(rng);
    inverse_ = map_.completeOrthogonalDecomposition().pseudoInverse();
}

Image StubLatentCodec::encode(const Image& frame) const {
    if (frame.channels != 3) throw ShapeError("latent encoder expects RGB frames");
    const Image pooled = avg_pool(frame, kFactor);
    Image out(pooled.height, pooled.width, channels());
    for (int y = 0; y < pooled.height; ++y)
        for (int x = 0; x < pooled.width; ++x) {
            Eigen::Vector3d rgb(pooled.at(y, x, 0) - 0.5, pooled.at(y, x, 1) - 0.5,
                                pooled.at(y, x, 2) - 0.5);
            const Vec z = map_ * rgb;
            for (int c = 0; c < channels(); ++c) out.at(y, x, c) = z(c);
        }
    return out;
}

Image StubLatentCodec::decode(const Image& latent, int height, int width) const {
    require_shape(latent.channels == channels(), "latent has the wrong channel count");
    Image small(latent.height, latent.width, 3);
    for (int y = 0; y < latent.height; ++y)
        for (int x = 0; x < latent.width; ++x) {
            Vec z(channels());
            for (int c = 0; c < channels(); ++c) z(c) = latent.at(y, x, c);
            const Vec rgb = inverse_ * z;
            for (int c = 0; c < 3; ++c) small.at(y, x, c) = std::clamp(rgb(c) + 0.5, 0.0, 1.0);
        }
    return resize_bilinear(small, height, width);
}

}  // namespace neurons::decoupler
