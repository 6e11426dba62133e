#include "neurons/decoupler/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "neurons/brain/train.hpp"
#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::decoupler {

namespace {

const std::array<const char*, 4> kLossNames{"seg", "cls", "txt", "rec"};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

std::string csv_row(const TrainLogRow& r) {
    std::ostringstream s;
    s << r.epoch << ',' << r.batch;
    for (double w : r.weights) s << ',' << fmt(w);
    for (double l : r.losses) s << ',' << fmt(l);
    s << ',' << fmt(r.total);
    return s.str();
}

}  // namespace

DecouplerDims decoupler_dims(const ExperimentConfig& cfg) {
    DecouplerDims d;
    d.tokens = cfg.model.tokens;
    d.width = cfg.model.width;
    d.text_tokens = cfg.model.text_tokens;
    d.attn = cfg.model.attn_width;
    d.channels = cfg.model.trunk_channels;
    d.seg_size = cfg.dataset.height / 4;
    d.latent_channels = cfg.model.latent_channels;
    d.vocab = cfg.model.vocab;
    d.text_hidden = cfg.model.text_hidden;
    d.frames = cfg.dataset.frames;
    return d;
}

RowVec mask_to_grid(const Image& mask, int grid) {
    require_shape(mask.channels == 1 && mask.height == mask.width && mask.height % grid == 0,
                  "mask cannot be pooled to the trunk grid");
    const Image small = threshold(avg_pool(mask, mask.height / grid), 0.5);
    RowVec out(static_cast<Eigen::Index>(small.size()));
    for (std::size_t i = 0; i < small.size(); ++i) out(static_cast<Eigen::Index>(i)) = small.data[i];
    return out;
}

std::vector<SampleTargets> build_targets(const Dataset& dataset, const DecouplerDims& dims,
                                         const brain::FrozenEncoderTargets& encoder,
                                         const LatentCodec& codec) {
    require_shape(codec.channels() == dims.latent_channels, "latent codec width mismatch");
    std::vector<SampleTargets> out;
    for (const auto& s : dataset.samples) {
        const auto& frames = s.clip.frames;
        require_shape(static_cast<int>(frames.size()) == dims.frames &&
                          s.annotations.key_masks.size() == frames.size(),
                      "clip frame count does not match the decoupler");
        SampleTargets t;
        t.masks.resize(dims.frames, dims.grid_pixels());
        t.latents.resize(dims.frames, dims.latent_dim());
        for (int f = 0; f < dims.frames; ++f) {
            t.masks.row(f) = mask_to_grid(s.annotations.key_masks[static_cast<std::size_t>(f)],
                                          dims.seg_size);
            const Image lat = codec.encode(frames[static_cast<std::size_t>(f)]);
            require_shape(static_cast<int>(lat.size()) == dims.latent_dim(),
                          "latent size does not match the reconstruction head");
            for (std::size_t i = 0; i < lat.size(); ++i)
                t.latents(f, static_cast<Eigen::Index>(i)) = lat.data[i];
        }
        t.concepts = s.annotations.concepts.transpose();
        t.tokens = s.annotations.caption_tokens;
        t.key_text = encoder.text_embed(s.annotations.key_object);
        out.push_back(std::move(t));
    }
    return out;
}

LossValues decoupler_batch(Decoupler& dec, brain::BrainModel& brain, const Mat& voxels,
                           const std::vector<const SampleTargets*>& targets,
                           const LossWeights& weights, bool accumulate) {
    const DecouplerDims& d = dec.dims();
    const auto batch = static_cast<Eigen::Index>(targets.size());
    const int frames = d.frames;
    const brain::BrainCache bc = brain.forward_cached(voxels);
    const Mat& e_vid = bc.out.e_vid;
    const Mat& e_txt = bc.out.e_txt;
    Mat d_vid = Mat::Zero(e_vid.rows(), e_vid.cols());
    Mat d_txt = Mat::Zero(e_txt.rows(), e_txt.cols());
    LossValues losses{};

    // concept recognition
    Mat concepts(batch, d.concepts);
    for (Eigen::Index b = 0; b < batch; ++b) concepts.row(b) = targets[static_cast<std::size_t>(b)]->concepts;
    Mat g;
    losses[1] = cls_loss(dec.classify(e_vid), concepts, &g);
    if (accumulate && weights[1] != 0) d_vid += dec.classify_backward(e_vid, weights[1] * g);

    // scene description
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& tokens = targets[static_cast<std::size_t>(b)]->tokens;
        const TextCache tc = dec.text_forward(e_txt.row(b), tokens);
        const double l = txt_loss(tc.logits, {tokens.begin() + 1, tokens.end()}, &g);
        losses[2] += l / static_cast<double>(batch);
        if (accumulate && weights[2] != 0) {
            d_txt.row(b) += dec.text_backward(tc, weights[2] * g / static_cast<double>(batch));
        }
    }

    // key-object segmentation, conditioned on the key concept's text embedding
    Mat seg_txt(batch * frames, e_txt.cols()), seg_gt(batch * frames, d.grid_pixels());
    Mat rec_txt(batch * frames, e_txt.cols()), rec_gt(batch * frames, d.latent_dim());
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& t = *targets[static_cast<std::size_t>(b)];
        for (int f = 0; f < frames; ++f) {
            seg_txt.row(b * frames + f) = t.key_text;
            seg_gt.row(b * frames + f) = t.masks.row(f);
            rec_txt.row(b * frames + f) = e_txt.row(b);
            rec_gt.row(b * frames + f) = t.latents.row(f);
        }
    }
    const TrunkCache seg_cache = dec.trunk_forward(e_vid, seg_txt);
    losses[0] = seg_loss(dec.seg_head(seg_cache), seg_gt, &g);
    if (accumulate && weights[0] != 0) {
        Mat unused = Mat::Zero(seg_txt.rows(), seg_txt.cols());
        dec.trunk_backward(seg_cache, dec.seg_head_backward(seg_cache, weights[0] * g), d_vid,
                           unused);
    }

    // blurry-video reconstruction, conditioned on the brain text embedding
    const TrunkCache rec_cache = dec.trunk_forward(e_vid, rec_txt);
    losses[3] = rec_loss(dec.rec_head(rec_cache), rec_gt, &g);
    if (accumulate && weights[3] != 0) {
        Mat d_rec_txt = Mat::Zero(rec_txt.rows(), rec_txt.cols());
        dec.trunk_backward(rec_cache, dec.rec_head_backward(rec_cache, weights[3] * g), d_vid,
                           d_rec_txt);
        for (Eigen::Index r = 0; r < d_rec_txt.rows(); ++r) d_txt.row(r / frames) += d_rec_txt.row(r);
    }

    if (accumulate) brain.backward(bc, d_vid, d_txt);
    return losses;
}

DecouplerTrainResult train_decoupler(const Dataset& dataset, const Checkpoint& brain_ckpt,
                                     const ExperimentConfig& cfg,
                                     const brain::FrozenEncoderTargets& encoder,
                                     const LatentCodec& codec,
                                     const DecouplerTrainOptions& options) {
    if (dataset.samples.empty()) throw DomainError("cannot train on an empty dataset");
    const DecouplerTrainConfig& tc = cfg.decoupler;
    const std::uint64_t seed = tc.seed ? tc.seed : derive_seed(cfg.seed, "decoupler");

    DecouplerTrainResult result;
    result.brain = brain::BrainModel::restore(brain_ckpt);
    result.decoupler = Decoupler(decoupler_dims(cfg), seed);
    Decoupler& dec = result.decoupler;
    brain::BrainModel& brain = result.brain;
    const auto targets = build_targets(dataset, dec.dims(), encoder, codec);

    AdamW dec_opt(AdamWConfig{tc.lr});
    AdamW brain_opt(AdamWConfig{tc.lr});
    for (const char* frozen : {"ridge.", "mlp.", "backbone."}) brain_opt.set_lr_multiplier(frozen, 0.0);
    for (const char* cotrained : {"prior.", "motion.", "text."})
        brain_opt.set_lr_multiplier(cotrained, tc.prior_lr_mult);

    std::array<bool, 4> disabled{};
    for (const auto& name : tc.disabled_losses)
        for (std::size_t k = 0; k < 4; ++k) disabled[k] |= name == kLossNames[k];

    std::ofstream log;
    if (options.log_path) {
        const bool fresh = !std::filesystem::exists(*options.log_path) ||
                           std::filesystem::file_size(*options.log_path) == 0;
        log.open(*options.log_path, std::ios::app);
        if (!log) throw StateError("cannot open training log " + options.log_path->string());
        if (fresh) log << kLogHeader << '\n';
    }

    auto snapshot = [&](int epochs_done) {
        Checkpoint ck;
        ck.meta["kind"] = "decoupler";
        ck.meta["config_hash"] = cfg.hash();
        ck.meta["brain_config_hash"] = brain_ckpt.meta_at("config_hash");
        ck.meta["epoch"] = std::to_string(epochs_done);
        ck.meta["seed"] = std::to_string(seed);
        dec.store(ck);
        brain.store(ck);
        return ck;
    };
    Checkpoint last_good = snapshot(0);

    Rng rng = make_rng(seed, "decoupler.shuffle");
    const std::size_t n = dataset.samples.size();
    const int per_batch = tc.batch_size;
    const int batches_per_epoch = static_cast<int>((n + per_batch - 1) / per_batch);
    std::vector<std::size_t> order(n);
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        LossValues epoch_sum{};
        for (int b = 0; b < batches_per_epoch; ++b) {
            const std::size_t start = static_cast<std::size_t>(b) * per_batch;
            const std::vector<std::size_t> rows(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + per_batch)));
            std::vector<const SampleTargets*> batch_targets;
            for (std::size_t r : rows) batch_targets.push_back(&targets[r]);

            LossWeights w = scheduled_weights(epoch, b, batches_per_epoch, tc.period_starts,
                                              tc.period_epochs);
            for (std::size_t k = 0; k < 4; ++k)
                if (disabled[k]) w[k] = 0.0;

            dec.params().zero_grad();
            brain.params().zero_grad();
            const LossValues l = decoupler_batch(dec, brain, brain::stack_voxels(dataset, rows),
                                                 batch_targets, w, true);
            TrainLogRow row{epoch, b, w, l, 0.0};
            try {
                row.total = total_loss(l, w);
            } catch (const NumericError& e) {
                if (options.last_good_path) save_checkpoint(last_good, *options.last_good_path);
                throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(b) + " (seg=" + fmt(l[0]) +
                                   " cls=" + fmt(l[1]) + " txt=" + fmt(l[2]) +
                                   " rec=" + fmt(l[3]) + ")");
            }
            dec_opt.step(dec.params());
            brain_opt.step(brain.params());
            for (std::size_t k = 0; k < 4; ++k) epoch_sum[k] += l[k] / batches_per_epoch;
            result.log.push_back(row);
            if (log) log << csv_row(row) << '\n';
            if (options.on_batch) options.on_batch(row);
        }
        result.epoch_losses.push_back(epoch_sum);
        last_good = snapshot(epoch + 1);
    }

    result.checkpoint = last_good;
    const auto& final_losses = result.epoch_losses.back();
    for (std::size_t k = 0; k < 4; ++k)
        result.checkpoint.meta[std::string("loss.") + kLossNames[k]] = fmt(final_losses[k]);
    return result;
}

}  // namespace neurons::decoupler
