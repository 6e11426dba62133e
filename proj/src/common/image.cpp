#include "neurons/common/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "neurons/common/error.hpp"

namespace neurons {

Image avg_pool(const Image& img, int factor) {
    if (factor <= 0 || img.height % factor != 0 || img.width % factor != 0) {
        throw ShapeError("avg_pool: factor must divide image dimensions");
    }
    Image out(img.height / factor, img.width / factor, img.channels);
    const double norm = 1.0 / (factor * factor);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double s = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        s += img.at(y * factor + dy, x * factor + dx, c);
                out.at(y, x, c) = s * norm;
            }
    return out;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw ShapeError("resize_bilinear: bad output size");
    Image out(out_h, out_w, img.channels);
    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
                const double bot = (1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
                out.at(y, x, c) = (1 - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

double mask_area_fraction(const Image& mask) {
    if (mask.pixels() == 0) return 0.0;
    double s = 0.0;
    for (double v : mask.data) s += v;
    return s / static_cast<double>(mask.pixels());
}

bool is_binary(const Image& mask) {
    return std::all_of(mask.data.begin(), mask.data.end(),
                       [](double v) { return v == 0.0 || v == 1.0; });
}

Image threshold(const Image& img, double level) {
    Image out = img;
    for (double& v : out.data) v = v >= level ? 1.0 : 0.0;
    return out;
}

void write_netpbm(const std::filesystem::path& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw ShapeError("netpbm supports 1 or 3 channels");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << (img.channels == 3 ? "P6" : "P5") << "\n"
        << img.width << " " << img.height << "\n255\n";
    std::string bytes(img.size(), '\0');
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image read_netpbm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    if ((magic != "P6" && magic != "P5") || w <= 0 || h <= 0 || maxval != 255) {
        throw IntegrityError("unsupported netpbm header in " + path.string());
    }
    Image img(h, w, magic == "P6" ? 3 : 1);
    std::string bytes(img.size(), '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw IntegrityError("truncated image " + path.string());
    }
    for (std::size_t i = 0; i < img.size(); ++i) {
        img.data[i] = static_cast<unsigned char>(bytes[i]) / 255.0;
    }
    return img;
}

}  // namespace neurons
