#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "neurons/common/image.hpp"
#include "neurons/common/nn.hpp"

namespace neurons {

inline constexpr int kClipFrames = 6;

/// One preprocessed (z-scored) voxel vector.
struct FmriSample {
    Vec voxels;
    int clip_id = 0;
    int subject_id = 0;
};

struct VideoClip {
    int clip_id = 0;
    Video frames;
};

/// Per-clip supervision targets for the four decoupled tasks.
struct TaskAnnotations {
    std::string key_object;    // taxonomy concept name
    std::vector<Image> key_masks;  // one binary mask per frame
    Vec concepts;              // 51-dim multi-hot
    std::vector<int> caption_tokens;  // [bos, ..., eos]
    std::string caption_text;
};

struct DatasetSample {
    FmriSample fmri;
    VideoClip clip;
    TaskAnnotations annotations;
};

struct Dataset {
    std::vector<DatasetSample> samples;
    int voxel_dim() const {
        return samples.empty() ? 0 : static_cast<int>(samples.front().fmri.voxels.size());
    }
};

struct DatasetSpec {
    int num_clips = 8;
    int height = 64;
    int width = 64;
    int frames = kClipFrames;
    int voxels = 2048;
    int max_objects = 3;
    int subject_id = 1;
    double noise = 0.1;
};

namespace tasks {

/// Renders random scenes, annotates them through the scene-backed mock
/// client, and synthesises voxels as a fixed random linear projection of the
/// pooled clip pixels plus seeded noise. Deterministic for a given seed.
Dataset generate_synthetic_dataset(const DatasetSpec& spec, std::uint64_t seed);

/// Pooled-pixel feature vector the synthetic voxels are projected from.
Vec clip_features(const Video& frames);

/// On-disk layout, one directory per clip:
///   clip_NNNN/frames/000.ppm .. 005.ppm   8-bit RGB
///   clip_NNNN/masks/000.pgm .. 005.pgm    8-bit 0/255 key-object masks
///   clip_NNNN/annotations                 "key: value" lines
///   clip_NNNN/voxels                      16-byte header + f32 LE
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

void write_voxels(const std::filesystem::path& path, const Vec& voxels);
Vec read_voxels(const std::filesystem::path& path);

std::string format_annotations(const DatasetSample& sample);
/// Parses the annotation text into `sample` (clip/subject ids, key object,
/// concepts, caption and its tokens).
void parse_annotations(const std::string& text, DatasetSample& sample);

std::string frame_filename(int index, const char* ext);

}  // namespace tasks
}  // namespace neurons
