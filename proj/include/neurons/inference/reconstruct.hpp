#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurons/brain/frozen_encoder.hpp"
#include "neurons/brain/model.hpp"
#include "neurons/common/error.hpp"
#include "neurons/decoupler/latent.hpp"
#include "neurons/decoupler/model.hpp"
#include "neurons/harness/checkpoint.hpp"
#include "neurons/harness/config.hpp"
#include "neurons/inference/conditioning.hpp"

namespace neurons::inference {

/// Text-to-video generator. Implementations declare whether one instance
/// may serve concurrent calls.
class T2VBackend {
public:
    virtual ~T2VBackend() = default;
    virtual Video generate(const std::string& prompt, const Image& control_image,
                           const Video& blurry_video, int num_frames,
                           std::uint64_t seed) const = 0;
    virtual bool stateless() const = 0;
    virtual std::string name() const = 0;
};

/// Blends the conditioned blurry video toward the control image and adds
/// seeded Gaussian noise, clamped to [0,1]. Exercises the plumbing only.
class StubT2VBackend : public T2VBackend {
public:
    explicit StubT2VBackend(double control_weight = 0.3, double noise = 0.02)
        : control_weight_(control_weight), noise_(noise) {}
    Video generate(const std::string& prompt, const Image& control_image,
                   const Video& blurry_video, int num_frames, std::uint64_t seed) const override;
    bool stateless() const override { return true; }
    std::string name() const override { return "stub"; }

private:
    double control_weight_;
    double noise_;
};

/// Adapter for an out-of-process generator. The conditioning is written to
/// a work directory (prompt.txt, control.ppm, blurry/NNN.ppm, request.json),
/// `command` is run with that directory as its only argument, and the
/// frames are read back from out/NNN.ppm.
class ExternalT2VBackend : public T2VBackend {
public:
    ExternalT2VBackend(std::string command, std::filesystem::path work_dir)
        : command_(std::move(command)), work_dir_(std::move(work_dir)) {}
    Video generate(const std::string& prompt, const Image& control_image,
                   const Video& blurry_video, int num_frames, std::uint64_t seed) const override;
    bool stateless() const override { return false; }
    std::string name() const override { return "external"; }

private:
    std::string command_;
    std::filesystem::path work_dir_;
};

/// Image-variation slot that turns the blurry keyframe into a control image.
class ControlImageBackend {
public:
    virtual ~ControlImageBackend() = default;
    virtual Image generate(const Image& keyframe, std::uint64_t seed) const = 0;
};

/// Returns the (already full-resolution) blurry keyframe unchanged.
class StubControlImageBackend : public ControlImageBackend {
public:
    Image generate(const Image& keyframe, std::uint64_t) const override { return keyframe; }
};

/// Generator failure; carries the conditioning that was assembled so far.
class BackendError : public Error {
public:
    BackendError(const std::string& what, ConditioningBundle bundle)
        : Error(what), bundle_(std::move(bundle)) {}
    const ConditioningBundle& bundle() const { return bundle_; }

private:
    ConditioningBundle bundle_;
};

struct Reconstruction {
    Video video;                     // interpolated to the target rate
    ConditioningBundle bundle;
    std::vector<Image> key_masks;    // binary predicted masks, one per clip frame
    Video blurry_video;              // decoded reconstruction head, unconditioned
    std::vector<std::string> concepts;  // taxonomy names with p > 0.5
    double fps = 0;
};

/// Loads both checkpoints once and reconstructs any number of samples.
/// Checkpoints are only read.
class Reconstructor {
public:
    Reconstructor(const Checkpoint& brain_ckpt, const Checkpoint& decoupler_ckpt,
                  const ExperimentConfig& cfg, const brain::FrozenEncoderTargets& encoder,
                  const decoupler::LatentCodec& codec);

    Reconstruction run(const Vec& voxels, const T2VBackend& backend,
                       const ControlImageBackend& control, std::uint64_t seed) const;

private:
    brain::BrainModel brain_;
    decoupler::Decoupler decoupler_;
    ExperimentConfig cfg_;
    const brain::FrozenEncoderTargets& encoder_;
    const decoupler::LatentCodec& codec_;
};

Reconstruction reconstruct_video(const FmriSample& sample, const Checkpoint& brain_ckpt,
                                 const Checkpoint& decoupler_ckpt, const ExperimentConfig& cfg,
                                 const brain::FrozenEncoderTargets& encoder,
                                 const decoupler::LatentCodec& codec, const T2VBackend& backend,
                                 std::uint64_t seed);

/// Backend named by `name` ("stub" or "external"); the NEURONS_BACKEND
/// environment variable overrides it and NEURONS_T2V_COMMAND supplies the
/// external command.
std::unique_ptr<T2VBackend> make_backend(const std::string& name,
                                         const std::filesystem::path& work_dir);

/// Per-sample output directory:
///   frames/NNN.ppm         generated video
///   masks/NNN.pgm          binary predicted key-object masks
///   bundle/prompt.txt, bundle/top_concept.txt, bundle/control.ppm,
///   bundle/masks/NNN.pgm (rescaled), bundle/blurry/NNN.ppm
///   meta.json
void write_bundle(const std::filesystem::path& dir, const ConditioningBundle& bundle);
void write_reconstruction(const std::filesystem::path& dir, const Reconstruction& rec,
                          const nlohmann::json& meta);

std::string sample_dirname(int clip_id);

}  // namespace neurons::inference
