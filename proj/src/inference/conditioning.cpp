#include "neurons/inference/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "neurons/common/error.hpp"

namespace neurons::inference {

Image rescale_mask(const Image& mask) {
    Image out = mask;
    for (double& v : out.data) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("mask value outside [0,1]");
        v = 0.5 + 0.5 * v;
    }
    return out;
}

Image apply_mask_condition(const Image& signal, const Image& mask) {
    require_shape(signal.height == mask.height && signal.width == mask.width &&
                      (mask.channels == 1 || mask.channels == signal.channels),
                  "mask does not broadcast over the signal");
    Image out = signal;
    for (int y = 0; y < signal.height; ++y)
        for (int x = 0; x < signal.width; ++x)
            for (int c = 0; c < signal.channels; ++c)
                out.at(y, x, c) *= mask.at(y, x, mask.channels == 1 ? 0 : c);
    return out;
}

Video apply_mask_condition(const Video& signal, const std::vector<Image>& masks) {
    require_shape(signal.size() == masks.size(), "one mask per frame is required");
    Video out;
    out.reserve(signal.size());
    for (std::size_t f = 0; f < signal.size(); ++f) out.push_back(apply_mask_condition(signal[f], masks[f]));
    return out;
}

Prompt build_prompt(const RowVec& cls_logits, const decoupler::Decoupler& dec,
                    const RowVec& e_txt, int max_len, const tasks::ConceptTaxonomy& taxonomy,
                    const tasks::Tokenizer& tokenizer) {
    require_shape(cls_logits.size() == static_cast<Eigen::Index>(taxonomy.names().size()),
                  "classifier logits do not match the taxonomy");
    Prompt p;
    Eigen::Index best = 0;
    cls_logits.maxCoeff(&best);
    p.top_index = static_cast<std::size_t>(best);
    p.top_concept = taxonomy.names()[p.top_index];
    p.text = tokenizer.decode(dec.greedy_decode(e_txt, max_len, &p.truncated));
    return p;
}

Video interpolate_fps(const Video& video, double source_fps, double target_fps) {
    if (video.size() < 2) throw DomainError("interpolation needs at least two frames");
    if (!(source_fps > 0) || !(target_fps > 0)) throw DomainError("frame rates must be positive");
    for (const auto& f : video) require_shape(f.same_shape(video.front()), "frames differ in shape");
    const auto frames = static_cast<double>(video.size());
    const auto out_count = static_cast<std::size_t>(std::lround(frames * target_fps / source_fps));
    if (out_count < 2) throw DomainError("target frame rate yields fewer than two frames");

    Video out;
    out.reserve(out_count);
    const double span = frames - 1;
    for (std::size_t k = 0; k < out_count; ++k) {
        const double t = span * static_cast<double>(k) / static_cast<double>(out_count - 1);
        const auto lo = std::min(static_cast<std::size_t>(t), video.size() - 2);
        const double a = t - static_cast<double>(lo);
        if (a == 0.0) {
            out.push_back(video[lo]);
        } else if (a == 1.0) {
            out.push_back(video[lo + 1]);
        } else {
            Image f = video[lo];
            for (std::size_t i = 0; i < f.size(); ++i)
                f.data[i] = (1 - a) * video[lo].data[i] + a * video[lo + 1].data[i];
            out.push_back(std::move(f));
        }
    }
    return out;
}

Image grid_to_mask(const RowVec& probs, int grid, int height, int width, double level) {
    require_shape(probs.size() == static_cast<Eigen::Index>(grid) * grid &&
                      height % grid == 0 && width % grid == 0,
                  "mask grid does not tile the frame");
    Image out(height, width, 1);
    const int sy = height / grid, sx = width / grid;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out.at(y, x) = probs((y / sy) * grid + x / sx) >= level ? 1.0 : 0.0;
    return out;
}

}  // namespace neurons::inference
