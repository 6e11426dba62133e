#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace neurons {

/// Dense HxWxC image with interleaved channels, values nominally in [0,1].
/// Masks are single-channel images with values in {0,1}.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::size_t size() const { return data.size(); }
    std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    bool operator==(const Image&) const = default;
};

using Video = std::vector<Image>;

/// Block-average downsampling by an integer factor (dimensions must divide).
Image avg_pool(const Image& img, int factor);

/// Bilinear resize with half-pixel centres (edge-clamped).
Image resize_bilinear(const Image& img, int out_h, int out_w);

/// Sum of mask values / (H*W).
double mask_area_fraction(const Image& mask);

/// True iff every value is exactly 0 or 1.
bool is_binary(const Image& mask);

Image threshold(const Image& img, double level);

// 8-bit binary netpbm I/O: P6 for 3-channel, P5 for 1-channel.
void write_netpbm(const std::filesystem::path& path, const Image& img);
Image read_netpbm(const std::filesystem::path& path);

}  // namespace neurons
