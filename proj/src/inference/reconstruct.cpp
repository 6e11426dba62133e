#include "neurons/inference/reconstruct.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "neurons/common/fileio.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/tasks/dataset.hpp"

namespace fs = std::filesystem;

namespace neurons::inference {

namespace {

void require_unit_range(const Video& video, const std::string& who) {
    for (const auto& f : video)
        for (double v : f.data)
            if (!(v >= 0.0 && v <= 1.0)) throw Error(who + " produced a value outside [0,1]");
}

void write_frames(const fs::path& dir, const std::vector<Image>& frames, const char* ext) {
    fs::create_directories(dir);
    for (std::size_t f = 0; f < frames.size(); ++f)
        write_netpbm(dir / tasks::frame_filename(static_cast<int>(f), ext), frames[f]);
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

}  // namespace

Video StubT2VBackend::generate(const std::string& prompt, const Image& control_image,
                               const Video& blurry_video, int num_frames,
                               std::uint64_t seed) const {
    if (prompt.empty()) throw DomainError("empty prompt");
    if (num_frames < 1) throw DomainError("num_frames must be positive");
    Video base = static_cast<int>(blurry_video.size()) == num_frames
                     ? blurry_video
                     : interpolate_fps(blurry_video, static_cast<double>(blurry_video.size()),
                                       static_cast<double>(num_frames));
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, noise_);
    for (auto& frame : base) {
        require_shape(frame.same_shape(control_image), "control image does not match the video");
        for (std::size_t i = 0; i < frame.size(); ++i) {
            const double v = (1 - control_weight_) * frame.data[i] +
                             control_weight_ * control_image.data[i] + noise(rng);
            frame.data[i] = std::clamp(v, 0.0, 1.0);
        }
    }
    return base;
}

Video ExternalT2VBackend::generate(const std::string& prompt, const Image& control_image,
                                   const Video& blurry_video, int num_frames,
                                   std::uint64_t seed) const {
    fs::remove_all(work_dir_);
    write_file_atomic(work_dir_ / "prompt.txt", prompt + "\n");
    write_netpbm(work_dir_ / "control.ppm", control_image);
    write_frames(work_dir_ / "blurry", blurry_video, "ppm");
    const nlohmann::json request{{"num_frames", num_frames},
                                 {"seed", seed},
                                 {"height", control_image.height},
                                 {"width", control_image.width}};
    write_file_atomic(work_dir_ / "request.json", request.dump(2));
    const int rc = std::system((command_ + " " + shell_quote(work_dir_.string())).c_str());
    if (rc != 0) throw Error("external backend exited with status " + std::to_string(rc));
    Video out;
    for (int f = 0; f < num_frames; ++f) {
        const fs::path p = work_dir_ / "out" / tasks::frame_filename(f, "ppm");
        if (!fs::exists(p)) throw Error("external backend did not write " + p.string());
        out.push_back(read_netpbm(p));
    }
    return out;
}

std::unique_ptr<T2VBackend> make_backend(const std::string& name, const fs::path& work_dir) {
    std::string chosen = name;
    if (const char* env = std::getenv("NEURONS_BACKEND"); env && *env) chosen = env;
    if (chosen == "stub") return std::make_unique<StubT2VBackend>();
    if (chosen == "external") {
        const char* cmd = std::getenv("NEURONS_T2V_COMMAND");
        if (!cmd || !*cmd) throw ConfigError("backend 'external' needs NEURONS_T2V_COMMAND");
        return std::make_unique<ExternalT2VBackend>(cmd, work_dir);
    }
    throw ConfigError("unknown backend '" + chosen + "' (expected stub or external)");
}

Reconstructor::Reconstructor(const Checkpoint& brain_ckpt, const Checkpoint& decoupler_ckpt,
                             const ExperimentConfig& cfg,
                             const brain::FrozenEncoderTargets& encoder,
                             const decoupler::LatentCodec& codec)
    // the decoupler checkpoint carries the co-trained prior/motion/text heads
    : brain_(brain::BrainModel::restore(
          decoupler_ckpt.tensors.count("brain.ridge.W") ? decoupler_ckpt : brain_ckpt)),
      decoupler_(decoupler::Decoupler::restore(decoupler_ckpt)),
      cfg_(cfg),
      encoder_(encoder),
      codec_(codec) {}

Reconstruction Reconstructor::run(const Vec& voxels, const T2VBackend& backend,
                                  const ControlImageBackend& control, std::uint64_t seed) const {
    const auto& d = decoupler_.dims();
    const int height = cfg_.dataset.height, width = cfg_.dataset.width;
    const brain::EmbeddingBundle emb = brain_.forward(voxels.transpose());
    const Mat& e_vid = emb.e_vid;
    const RowVec e_txt = emb.e_txt.row(0);

    Reconstruction rec;
    const RowVec logits = decoupler_.classify(e_vid).row(0);
    const auto& taxonomy = tasks::ConceptTaxonomy::standard();
    for (Eigen::Index k = 0; k < logits.size(); ++k)
        if (logits(k) > 0) rec.concepts.push_back(taxonomy.names()[static_cast<std::size_t>(k)]);
    const Prompt prompt = build_prompt(logits, decoupler_, e_txt, cfg_.model.max_decode, taxonomy,
                                       tasks::Tokenizer::standard());

    ConditioningBundle& bundle = rec.bundle;
    bundle.top_concept = prompt.top_concept;
    bundle.prompt = prompt.text.empty() ? prompt.top_concept : prompt.text;
    bundle.prompt_truncated = prompt.truncated;

    // key-object masks, conditioned on the top-1 concept's text embedding
    const RowVec key_text = encoder_.text_embed(prompt.top_concept);
    const Mat probs = decoupler_.seg_forward(e_vid, key_text.replicate(e_vid.rows(), 1));
    for (Eigen::Index f = 0; f < probs.rows(); ++f) {
        rec.key_masks.push_back(grid_to_mask(probs.row(f), d.seg_size, height, width,
                                             cfg_.inference.mask_threshold));
        bundle.rescaled_masks.push_back(rescale_mask(rec.key_masks.back()));
    }

    // blurry video from the reconstruction head, conditioned on the brain text embedding
    const Mat latents = decoupler_.rec_forward(e_vid, e_txt.replicate(e_vid.rows(), 1));
    for (Eigen::Index f = 0; f < latents.rows(); ++f) {
        Image lat(d.latent_size(), d.latent_size(), d.latent_channels);
        for (std::size_t i = 0; i < lat.size(); ++i) lat.data[i] = latents(f, static_cast<Eigen::Index>(i));
        rec.blurry_video.push_back(codec_.decode(lat, height, width));
    }
    bundle.blurry_video = apply_mask_condition(rec.blurry_video, bundle.rescaled_masks);

    const auto key = static_cast<std::size_t>(keyframe_index(static_cast<int>(rec.blurry_video.size())));
    bundle.control_image = apply_mask_condition(
        control.generate(rec.blurry_video[key], derive_seed(seed, "control")),
        bundle.rescaled_masks[key]);

    const Video blurry_target =
        interpolate_fps(bundle.blurry_video, cfg_.inference.source_fps, cfg_.inference.target_fps);
    const int num_frames = static_cast<int>(blurry_target.size());
    try {
        rec.video = backend.generate(bundle.prompt, bundle.control_image, blurry_target,
                                     num_frames, seed);
        if (static_cast<int>(rec.video.size()) != num_frames)
            throw Error("backend returned " + std::to_string(rec.video.size()) + " frames, expected " +
                        std::to_string(num_frames));
        for (const auto& f : rec.video)
            require_shape(f.same_shape(bundle.control_image), "backend frame shape");
        require_unit_range(rec.video, "backend");
    } catch (const std::exception& e) {
        throw BackendError(backend.name() + " backend failed: " + e.what(), bundle);
    }
    rec.fps = cfg_.inference.target_fps;
    return rec;
}

Reconstruction reconstruct_video(const FmriSample& sample, const Checkpoint& brain_ckpt,
                                 const Checkpoint& decoupler_ckpt, const ExperimentConfig& cfg,
                                 const brain::FrozenEncoderTargets& encoder,
                                 const decoupler::LatentCodec& codec, const T2VBackend& backend,
                                 std::uint64_t seed) {
    const Reconstructor r(brain_ckpt, decoupler_ckpt, cfg, encoder, codec);
    return r.run(sample.voxels, backend, StubControlImageBackend{}, seed);
}

void write_bundle(const fs::path& dir, const ConditioningBundle& bundle) {
    const fs::path b = dir / "bundle";
    write_file_atomic(b / "prompt.txt", bundle.prompt + "\n");
    write_file_atomic(b / "top_concept.txt", bundle.top_concept + "\n");
    if (bundle.control_image.size()) write_netpbm(b / "control.ppm", bundle.control_image);
    write_frames(b / "masks", bundle.rescaled_masks, "pgm");
    write_frames(b / "blurry", bundle.blurry_video, "ppm");
}

void write_reconstruction(const fs::path& dir, const Reconstruction& rec,
                          const nlohmann::json& meta) {
    write_bundle(dir, rec.bundle);
    write_frames(dir / "frames", rec.video, "ppm");
    write_frames(dir / "masks", rec.key_masks, "pgm");
    nlohmann::json m = meta;
    m["frames"] = rec.video.size();
    m["fps"] = rec.fps;
    m["top_concept"] = rec.bundle.top_concept;
    m["prompt"] = rec.bundle.prompt;
    m["prompt_truncated"] = rec.bundle.prompt_truncated;
    m["concepts"] = rec.concepts;
    write_file_atomic(dir / "meta.json", m.dump(2) + "\n");
}

std::string sample_dirname(int clip_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sample_%04d", clip_id);
    return buf;
}

}  // namespace neurons::inference
