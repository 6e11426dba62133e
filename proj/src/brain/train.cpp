#include "neurons/brain/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "neurons/brain/losses.hpp"
#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::brain {

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

Mat gather_rows(const Mat& m, const std::vector<std::size_t>& rows, int group) {
    Mat out(static_cast<Eigen::Index>(rows.size()) * group, m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.middleRows(static_cast<Eigen::Index>(i) * group, group) =
            m.middleRows(static_cast<Eigen::Index>(rows[i]) * group, group);
    return out;
}

Mat curve_tensor(const std::vector<BrainEpochLoss>& curve) {
    Mat m(static_cast<Eigen::Index>(curve.size()), 4);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const auto& c = curve[i];
        m.row(static_cast<Eigen::Index>(i)) << c.epoch, c.clip_v, c.clip_t, c.prior;
    }
    return m;
}

std::vector<BrainEpochLoss> curve_from_tensor(const Mat& m) {
    std::vector<BrainEpochLoss> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.push_back({static_cast<int>(m(i, 0)), m(i, 1), m(i, 2), m(i, 3)});
    return out;
}

}  // namespace

BrainDims brain_dims(const ExperimentConfig& cfg, int voxels) {
    BrainDims d;
    d.voxels = voxels;
    d.hidden = cfg.model.hidden;
    d.tokens = cfg.model.tokens;
    d.width = cfg.model.width;
    d.text_tokens = cfg.model.text_tokens;
    d.frames = cfg.dataset.frames;
    return d;
}

BrainTargets compute_targets(const Dataset& dataset, const FrozenEncoderTargets& encoder) {
    BrainTargets t;
    const auto s = static_cast<Eigen::Index>(dataset.samples.size());
    const int frames = dataset.samples.empty()
                           ? 0
                           : static_cast<int>(dataset.samples.front().clip.frames.size());
    t.video.resize(s * frames, encoder.tokens() * encoder.width());
    t.text.resize(s, encoder.text_tokens() * encoder.width());
    for (Eigen::Index i = 0; i < s; ++i) {
        const auto& sample = dataset.samples[static_cast<std::size_t>(i)];
        require_shape(static_cast<int>(sample.clip.frames.size()) == frames,
                      "clips have differing frame counts");
        t.video.middleRows(i * frames, frames) = encoder.video_embed(sample.clip.frames);
        t.text.row(i) = encoder.text_embed(sample.annotations.caption_text);
    }
    return t;
}

Mat stack_voxels(const Dataset& dataset, const std::vector<std::size_t>& rows) {
    const int v = dataset.voxel_dim();
    Mat x(static_cast<Eigen::Index>(rows.size()), v);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Vec& voxels = dataset.samples.at(rows[i]).fmri.voxels;
        require_shape(voxels.size() == v, "samples have differing voxel counts");
        x.row(static_cast<Eigen::Index>(i)) = voxels.transpose();
    }
    return x;
}

BrainTrainResult train_brain_model(const Dataset& dataset, const ExperimentConfig& cfg,
                                   const FrozenEncoderTargets& encoder,
                                   const BrainTrainOptions& options) {
    if (dataset.samples.empty()) throw DomainError("cannot train on an empty dataset");
    const BrainTrainConfig& tc = cfg.brain;
    const BrainDims dims = brain_dims(cfg, dataset.voxel_dim());
    const BrainTargets targets = compute_targets(dataset, encoder);
    require_shape(targets.video.cols() == dims.image_dim() && targets.text.cols() == dims.text_dim(),
                  "encoder targets do not match model dims");

    BrainTrainResult result;
    AdamW opt(AdamWConfig{tc.lr, 0.9, 0.999, 1e-8, tc.weight_decay});
    Rng rng = make_rng(cfg.seed, "brain.train");
    int start_epoch = 0;
    if (options.resume) {
        const Checkpoint& ck = *options.resume;
        if (ck.meta_at("config_hash") != cfg.hash()) {
            throw StateError("brain checkpoint was written under a different config");
        }
        result.model = BrainModel::restore(ck);
        std::map<std::string, Mat> state;
        for (const auto& [name, value] : ck.tensors)
            if (name.rfind("adam.", 0) == 0) state[name.substr(5)] = value;
        opt.import_state(state, std::stol(ck.meta_at("adam.steps")));
        rng = deserialize_rng(ck.meta_at("rng"));
        start_epoch = std::stoi(ck.meta_at("epoch"));
        result.curve = curve_from_tensor(ck.tensor_at("curve"));
    } else {
        result.model = BrainModel(dims, derive_seed(cfg.seed, "init"));
    }

    BrainModel& model = result.model;
    const int frames = dims.frames;
    const int mix_epochs = static_cast<int>(std::ceil(tc.mixco_fraction * tc.epochs - 1e-9));
    const int end_epoch = std::min(tc.epochs, options.stop_after.value_or(tc.epochs));
    std::vector<std::size_t> order(dataset.samples.size());

    for (int epoch = start_epoch; epoch < end_epoch; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        BrainEpochLoss acc{epoch + 1};
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(tc.batch_size)) {
            const std::vector<std::size_t> rows(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() + static_cast<std::ptrdiff_t>(
                                    std::min(order.size(), start + tc.batch_size)));
            const Mat x = stack_voxels(dataset, rows);
            const Mat tgt_vid = gather_rows(targets.video, rows, frames);
            const Mat tgt_txt = gather_rows(targets.text, rows, 1);
            model.params().zero_grad();

            const BrainCache clean = model.forward_cached(x);
            Mat g_prior, g_txt, g_vid;
            const double l_prior = prior_loss(clean.out.e_vid, tgt_vid, &g_prior);
            const double l_txt = clip_text_loss(clean.out.e_txt, tgt_txt, tc.tau, &g_txt);
            double l_vid;
            if (epoch < mix_epochs && rows.size() >= 2) {
                const MixState state = sample_mix_state(rng, rows.size(), tc.beta_alpha);
                const BrainCache mixed = model.forward_cached(mixco_mix(x, state));
                l_vid = bimixco_loss(mixed.out.e_vid, tgt_vid, state.expand_to_frames(frames),
                                     tc.tau, &g_vid);
                model.backward(mixed, g_vid, Mat());
                model.backward(clean, g_prior, g_txt);
            } else {
                l_vid = clip_text_loss(clean.out.e_vid, tgt_vid, tc.tau, &g_vid);
                model.backward(clean, g_vid + g_prior, g_txt);
            }
            if (!std::isfinite(l_vid) || !std::isfinite(l_txt) || !std::isfinite(l_prior)) {
                throw NumericError("non-finite brain loss at epoch " + std::to_string(epoch + 1) +
                                   " batch " + std::to_string(batches) + ": clip_v=" +
                                   fmt(l_vid) + " clip_t=" + fmt(l_txt) +
                                   " prior=" + fmt(l_prior));
            }
            if (tc.ridge_l2 > 0) {
                model.params().grad("ridge.W") += 2.0 * tc.ridge_l2 * model.params()["ridge.W"];
            }
            opt.step(model.params());
            acc.clip_v += l_vid;
            acc.clip_t += l_txt;
            acc.prior += l_prior;
            ++batches;
        }
        acc.clip_v /= batches;
        acc.clip_t /= batches;
        acc.prior /= batches;
        result.curve.push_back(acc);
        if (options.on_epoch) options.on_epoch(acc);
    }

    Checkpoint& ck = result.checkpoint;
    ck.meta["kind"] = "brain";
    ck.meta["config_hash"] = cfg.hash();
    ck.meta["epoch"] = std::to_string(end_epoch);
    ck.meta["rng"] = serialize_rng(rng);
    ck.meta["adam.steps"] = std::to_string(opt.steps());
    if (!result.curve.empty()) {
        const auto& last = result.curve.back();
        ck.meta["loss.clip_v"] = fmt(last.clip_v);
        ck.meta["loss.clip_t"] = fmt(last.clip_t);
        ck.meta["loss.prior"] = fmt(last.prior);
        ck.meta["loss.total"] = fmt(last.total());
    }
    model.store(ck);
    for (const auto& [name, value] : opt.export_state()) ck.tensors["adam." + name] = value;
    ck.tensors["curve"] = curve_tensor(result.curve);
    return result;
}

}  // namespace neurons::brain
