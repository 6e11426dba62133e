#pragma once

#include <string>
#include <vector>

#include "neurons/common/image.hpp"
#include "neurons/common/nn.hpp"
#include "neurons/decoupler/model.hpp"
#include "neurons/tasks/taxonomy.hpp"
#include "neurons/tasks/tokenizer.hpp"

namespace neurons::inference {

/// Everything the text-to-video backend is conditioned on.
struct ConditioningBundle {
    Image control_image;               // H x W x 3, keyframe mask applied
    Video blurry_video;                // F frames, masks applied
    std::vector<Image> rescaled_masks;  // F single-channel maps in [0.5, 1]
    std::string prompt;
    std::string top_concept;
    bool prompt_truncated = false;
};

/// m' = 0.5 + 0.5 m. Values outside [0,1] raise DomainError.
Image rescale_mask(const Image& mask);

/// Elementwise product; a single-channel mask broadcasts over the signal's
/// channels.
Image apply_mask_condition(const Image& signal, const Image& mask);
Video apply_mask_condition(const Video& signal, const std::vector<Image>& masks);

/// Keyframe used for the control image and the caption.
inline int keyframe_index(int frames) { return frames / 2; }

struct Prompt {
    std::string top_concept;
    std::size_t top_index = 0;
    std::string text;
    bool truncated = false;
};

/// Top-1 concept from the classifier logits plus a greedy caption.
Prompt build_prompt(const RowVec& cls_logits, const decoupler::Decoupler& dec,
                    const RowVec& e_txt, int max_len, const tasks::ConceptTaxonomy& taxonomy,
                    const tasks::Tokenizer& tokenizer);

/// Linear interpolation in pixel space at uniform timestamps covering the
/// same duration. Output length is round(F * target / source); the first
/// and last frames are kept exactly. Needs at least two frames.
Video interpolate_fps(const Video& video, double source_fps, double target_fps);

/// Nearest-neighbour upsampling of a row-major grid x grid probability map,
/// thresholded into a binary height x width mask.
Image grid_to_mask(const RowVec& probs, int grid, int height, int width, double level);

}  // namespace neurons::inference
