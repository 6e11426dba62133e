// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/contrastive_oracle.hpp"
#include "../support/finite_diff.hpp"
#include "../support/key_object_oracle.hpp"
#include "../support/random_tracks.hpp"
#include "neurons/brain/losses.hpp"
#include "neurons/brain/model.hpp"
#include "neurons/common/fileio.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/decoupler/layers.hpp"
#include "neurons/decoupler/model.hpp"
#include "neurons/eval/captions.hpp"
#include "neurons/eval/metrics.hpp"
#include "neurons/eval/report.hpp"
#include "neurons/harness/pipeline.hpp"
#include "neurons/inference/reconstruct.hpp"
#include "neurons/tasks/key_object.hpp"
#include "neurons/tasks/taxonomy.hpp"

using namespace neurons;
using nlohmann::json;
using support::numeric_grad;
using support::randn;
using support::rel_error;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("neurons_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

// ---------------------------------------------------------------- 1

brain::BrainDims tiny_brain() {
    brain::BrainDims d;
    d.voxels = 10;
    d.hidden = 6;
    d.mlp_blocks = 2;
    d.tokens = 2;
    d.width = 3;
    d.text_tokens = 2;
    d.frames = 3;
    return d;
}

decoupler::DecouplerDims tiny_decoupler() {
    decoupler::DecouplerDims d;
    d.tokens = 2;
    d.width = 3;
    d.text_tokens = 2;
    d.attn = 4;
    d.channels = 2;
    d.seg_size = 4;
    d.latent_channels = 2;
    d.concepts = 5;
    d.vocab = 7;
    d.text_hidden = 4;
    d.frames = 2;
    return d;
}

Mat binary(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::bernoulli_distribution b(0.5);
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = b(rng);
    return m;
}

// Worst relative error between the accumulated parameter gradients and
// central differences of `objective` over every parameter.
template <typename Model>
double param_error(Model& model, const std::function<double(const Model&)>& objective) {
    double worst = 0;
    for (const auto& [name, value] : model.params().values()) {
        auto f = [&, n = name](const Mat& p) {
            Model probe = model;
            probe.params()[n] = p;
            return objective(probe);
        };
        worst = std::max(worst, rel_error(model.params().grad(name), numeric_grad(f, value)));
    }
    return worst;
}

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    constexpr int kSeeds = 20;
    const char* names[] = {"L_seg", "L_cls", "L_txt", "L_rec", "L_prior", "L_CLIPt", "BiMixCo"};
    std::vector<double> worst(7, 0.0);
    const auto dd = tiny_decoupler();
    const auto bd = tiny_brain();
    for (int seed = 0; seed < kSeeds; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 1000);
        decoupler::Decoupler dec(dd, static_cast<std::uint64_t>(seed));
        for (auto& [n, v] : dec.params().values()) v += randn(rng, v.rows(), v.cols(), 0.2);
        const Mat vid = randn(rng, 3, dd.tokens * dd.width);
        const Mat txt = randn(rng, 3, dd.text_tokens * dd.width);

        // seg and rec through the shared trunk, including the input gradients
        for (int which : {0, 3}) {
            const Mat target = which == 0 ? binary(rng, 3, dd.grid_pixels()) : randn(rng, 3, dd.latent_dim());
            auto loss = [&](const decoupler::Decoupler& m, const Mat& v, const Mat& t) {
                return which == 0 ? decoupler::seg_loss(m.seg_forward(v, t), target)
                                  : decoupler::rec_loss(m.rec_forward(v, t), target);
            };
            dec.params().zero_grad();
            const auto cache = dec.trunk_forward(vid, txt);
            Mat g;
            Mat d_feat;
            if (which == 0) {
                decoupler::seg_loss(dec.seg_head(cache), target, &g);
                d_feat = dec.seg_head_backward(cache, g);
            } else {
                decoupler::rec_loss(dec.rec_head(cache), target, &g);
                d_feat = dec.rec_head_backward(cache, g);
            }
            Mat dv = Mat::Zero(vid.rows(), vid.cols()), dt = Mat::Zero(txt.rows(), txt.cols());
            dec.trunk_backward(cache, d_feat, dv, dt);
            double e = param_error<decoupler::Decoupler>(dec, [&](const auto& m) { return loss(m, vid, txt); });
            e = std::max(e, rel_error(dv, numeric_grad([&](const Mat& v) { return loss(dec, v, txt); }, vid)));
            e = std::max(e, rel_error(dt, numeric_grad([&](const Mat& t) { return loss(dec, vid, t); }, txt)));
            worst[static_cast<std::size_t>(which)] = std::max(worst[static_cast<std::size_t>(which)], e);
        }

        // concept head
        {
            const Mat e_vid = randn(rng, 2 * dd.frames, dd.tokens * dd.width);
            const Mat concepts = binary(rng, 2, dd.concepts);
            dec.params().zero_grad();
            Mat g;
            decoupler::cls_loss(dec.classify(e_vid), concepts, &g);
            const Mat dv = dec.classify_backward(e_vid, g);
            auto loss = [&](const decoupler::Decoupler& m, const Mat& v) {
                return decoupler::cls_loss(m.classify(v), concepts);
            };
            double e = param_error<decoupler::Decoupler>(dec, [&](const auto& m) { return loss(m, e_vid); });
            e = std::max(e, rel_error(dv, numeric_grad([&](const Mat& v) { return loss(dec, v); }, e_vid)));
            worst[1] = std::max(worst[1], e);
        }

        // caption decoder, teacher forced
        {
            const RowVec e_txt = randn(rng, 1, dd.text_tokens * dd.width);
            std::uniform_int_distribution<int> tok(0, dd.vocab - 1);
            std::vector<int> tokens(5);
            for (int& t : tokens) t = tok(rng);
            const std::vector<int> next(tokens.begin() + 1, tokens.end());
            dec.params().zero_grad();
            const auto cache = dec.text_forward(e_txt, tokens);
            Mat g;
            decoupler::txt_loss(cache.logits, next, &g);
            const RowVec de = dec.text_backward(cache, g);
            auto loss = [&](const decoupler::Decoupler& m, const RowVec& e) {
                return decoupler::txt_loss(m.text_forward(e, tokens).logits, next);
            };
            double e = param_error<decoupler::Decoupler>(dec, [&](const auto& m) { return loss(m, e_txt); });
            e = std::max(e, rel_error(de, numeric_grad([&](const Mat& x) { return loss(dec, x); }, e_txt)));
            worst[2] = std::max(worst[2], e);
        }

        // brain-model objectives through every brain parameter
        brain::BrainModel model(bd, static_cast<std::uint64_t>(seed));
        for (auto& [n, v] : model.params().values()) v += randn(rng, v.rows(), v.cols(), 0.1);
        const Mat x = randn(rng, 3, bd.voxels);
        const Mat tgt_vid = randn(rng, 3 * bd.frames, bd.image_dim());
        const Mat tgt_txt = randn(rng, 3, bd.text_dim());
        const double tau = 0.2 + 0.05 * seed;
        Rng mix_rng = make_rng(static_cast<std::uint64_t>(seed), "acceptance.mix");
        const brain::MixState state = brain::sample_mix_state(mix_rng, 3, 0.5);
        const Mat xm = brain::mixco_mix(x, state);
        const brain::MixState frames = state.expand_to_frames(bd.frames);
        for (int which : {4, 5, 6}) {
            const Mat& input = which == 6 ? xm : x;
            auto loss = [&](const brain::BrainModel& m) {
                const auto out = m.forward(input);
                if (which == 4) return brain::prior_loss(out.e_vid, tgt_vid);
                if (which == 5) return brain::clip_text_loss(out.e_txt, tgt_txt, tau);
                return brain::bimixco_loss(out.e_vid, tgt_vid, frames, tau);
            };
            model.params().zero_grad();
            const auto cache = model.forward_cached(input);
            Mat g;
            if (which == 4) {
                brain::prior_loss(cache.out.e_vid, tgt_vid, &g);
                model.backward(cache, g, Mat());
            } else if (which == 5) {
                brain::clip_text_loss(cache.out.e_txt, tgt_txt, tau, &g);
                model.backward(cache, Mat(), g);
            } else {
                brain::bimixco_loss(cache.out.e_vid, tgt_vid, frames, tau, &g);
                model.backward(cache, g, Mat());
            }
            const double e = param_error<brain::BrainModel>(model, loss);
            worst[static_cast<std::size_t>(which)] = std::max(worst[static_cast<std::size_t>(which)], e);
        }
    }
    const double elapsed = seconds_since(t0);
    double overall = 0;
    std::string per;
    for (std::size_t i = 0; i < worst.size(); ++i) {
        overall = std::max(overall, worst[i]);
        per += fmt(" %s=%.1e", names[i], worst[i]);
    }
    return {overall < 1e-4 && elapsed < 60.0,
            fmt("%d seeds x 7 losses, max rel err %.2e (< 1e-4), %.1f s (< 60 s);", kSeeds, overall, elapsed) + per};
}

// ---------------------------------------------------------------- 2

oracle::Rows to_rows(const Mat& m) {
    oracle::Rows r(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(i)].push_back(m(i, j));
    return r;
}

Outcome bimixco_reduction() {
    double worst = 0;
    const double taus[] = {0.006, 0.05, 0.3, 1.0};
    for (int b = 0; b < 100; ++b) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(b) + 77);
        const Eigen::Index rows = 2 + b % 11, cols = 3 + b % 7;
        const Mat e = randn(rng, rows, cols), t = randn(rng, rows, cols);
        Rng mix_rng = make_rng(static_cast<std::uint64_t>(b), "acceptance.partners");
        // lambda forced to 1 with arbitrary partners: the partner terms vanish
        brain::MixState s = brain::sample_mix_state(mix_rng, static_cast<std::size_t>(rows), 0.15);
        std::fill(s.lambda.begin(), s.lambda.end(), 1.0);
        const double tau = taus[b % 4];
        const double ref = oracle::symmetric_infonce(to_rows(e), to_rows(t), tau);
        worst = std::max(worst, std::abs(brain::bimixco_loss(e, t, s, tau) - ref));
        worst = std::max(worst, std::abs(brain::bimixco_loss(e, t, brain::MixState::identity(static_cast<std::size_t>(rows)), tau) - ref));
    }
    return {worst <= 1e-8, fmt("100 batches, tau in {0.006,0.05,0.3,1}, max |diff| %.2e (<= 1e-8)", worst)};
}

// ---------------------------------------------------------------- 3

Outcome scheduler_suite() {
    const std::array<int, 4> starts{0, 5, 10, 15};
    constexpr int kPeriod = 20;
    long checks = 0;
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok && failures.size() < 3) failures.push_back(what);
    };
    for (int nb : {1, 2, 3, 4, 5}) {
        const int total = kPeriod * nb;
        for (int e = 0; e < starts.back() + kPeriod + 5; ++e) {
            for (int b = 0; b < nb; ++b) {
                const auto w = decoupler::scheduled_weights(e, b, nb, starts, kPeriod);
                for (std::size_t k = 0; k < 4; ++k) {
                    const int s = starts[k];
                    const double v = decoupler::schedule_weight(e, b, nb, s, kPeriod);
                    const std::string at = fmt("nb=%d e=%d b=%d period=%zu", nb, e, b, k);
                    expect(v == w[k], "scheduled_weights disagrees at " + at);
                    expect(v >= 1.0 && v <= 10.0, "out of [1,10] at " + at);
                    if (e < s || e >= s + kPeriod) {
                        expect(v == 1.0, "not 1 outside the period at " + at);
                        continue;
                    }
                    const int c = (e - s) * nb + b;
                    if (c == 0) expect(std::abs(v - 1.0) <= 1e-9, "not 1 at the boundary " + at);
                    if (2 * c == total) expect(std::abs(v - 10.0) <= 1e-9, "not 10 at the midpoint " + at);
                    if (c > 0) {
                        const int m = total - c;
                        const double mirror = decoupler::schedule_weight(s + m / nb, m % nb, nb, s, kPeriod);
                        expect(std::abs(v - mirror) <= 1e-9, "asymmetric at " + at);
                    }
                    const double ref = 1.0 + 9.0 * std::abs(std::sin(std::numbers::pi * c / total));
                    expect(std::abs(v - ref) <= 1e-9, "formula mismatch at " + at);
                }
            }
        }
        // the period ends exactly at S + P: first batch after it is back to 1
        for (int s : starts) expect(decoupler::schedule_weight(s + kPeriod, 0, nb, s, kPeriod) == 1.0, "end of period");
    }
    std::string detail = fmt("starts {0,5,10,15}, P=20, N_B in 1..5, %ld checks", checks);
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty(), detail};
}

// ---------------------------------------------------------------- 4

Outcome key_object_oracle() {
    const auto& tax = tasks::ConceptTaxonomy::standard();
    std::mt19937_64 rng(2024);
    int agree = 0, fallbacks = 0;
    constexpr int kScenes = 1000;
    for (int i = 0; i < kScenes; ++i) {
        const auto tracks = support::random_track_set(rng, 5);
        const auto chosen = tasks::discover_key_object(tracks, tax);
        const auto ref = oracle::brute_force_key_object(tracks, tax);
        agree += chosen.track_index == ref.index && chosen.fallback == ref.fallback;
        fallbacks += ref.fallback;
    }
    return {agree == kScenes, fmt("%d/%d scenes agree (%d via fallback)", agree, kScenes, fallbacks)};
}

// ---------------------------------------------------------------- 5

Outcome metric_references() {
    std::vector<std::string> bad;
    std::string detail;

    std::mt19937_64 rng(5);
    const Mat gt = binary(rng, 3, 16);
    const double bce = decoupler::seg_loss(Mat::Constant(3, 16, 0.5), gt);
    const double bce_logit = decoupler::cls_loss(Mat::Zero(3, 16), gt);
    const double bce_err = std::max(std::abs(bce - std::log(2.0)), std::abs(bce_logit - std::log(2.0)));
    if (bce_err > 1e-9) bad.push_back("BCE");
    detail += fmt("BCE(0.5) err %.1e", bce_err);

    const auto p = eval::psnr(Image(16, 16, 3, 0.3), Image(16, 16, 3, 0.4));
    if (std::abs(p.db - 20.0) > 1e-6) bad.push_back("PSNR");
    detail += fmt(", PSNR %.9f dB", p.db);

    Image a(4, 4, 1), b(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            a.at(y, x) = x < 2;
            b.at(y, x) = y < 2;
        }
    // |A| = |B| = 8, |A and B| = 4
    const double d = eval::dice(a, b).score;
    if (d != 0.5) bad.push_back("Dice");
    detail += fmt(", Dice %.17g", d);

    const double bleu1 = eval::bleu("a b c d", {"a b c d e"})[0];
    const double bleu_ref = std::exp(1.0 - 5.0 / 4.0);
    if (std::abs(bleu1 - bleu_ref) > 1e-6) bad.push_back("BLEU");
    detail += fmt(", BLEU-1 err %.1e", std::abs(bleu1 - bleu_ref));

    // uniform classifier: every candidate ties, so the ground truth wins half the 2-way trials
    const RowVec uniform = RowVec::Constant(64, 1.0 / 64);
    std::mt19937_64 prng(9);
    std::uniform_real_distribution<double> u(0.01, 1);
    double sum = 0, lo = 1, hi = 0;
    for (int s = 0; s < 50; ++s) {
        RowVec g(64);
        for (auto& v : g) v = u(prng);
        const double r = eval::nway_topk(g / g.sum(), uniform, 2, 1, 100, derive_seed(9, "sample." + std::to_string(s)));
        sum += r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    const double rate = sum / 50;
    if (rate < 0.40 || rate > 0.60) bad.push_back("uniform 2-way");
    detail += fmt(", uniform 2-way %.3f (per-sample %.2f..%.2f)", rate, lo, hi);

    for (const auto& x : bad) detail += "; FAILED " + x;
    return {bad.empty(), detail};
}

// ---------------------------------------------------------------- 6, 7

struct Shared {
    ExperimentConfig cfg;
    fs::path run = scratch("pipeline");
    double pipeline_seconds = 0;
    harness::PipelineResult result;
};

Outcome overfit_smoke(Shared& s) {
    const auto t0 = Clock::now();
    s.result = harness::run_pipeline(s.cfg, s.run, {.until = std::nullopt, .force = true});
    s.pipeline_seconds = seconds_since(t0);
    const json& st = s.result.manifest["stages"];
    const double brain_red = st["train-brain"]["summary"]["reduction"];
    std::string detail = fmt("%d clips; brain loss -%.1f%% (>= 80%%); decoupler", s.cfg.dataset.num_clips,
                             100 * brain_red);
    bool ok = brain_red >= 0.8;
    for (const char* k : {"seg", "cls", "txt", "rec"}) {
        const double r = st["train-decoupler"]["summary"][k]["reduction"];
        ok = ok && r >= 0.5;
        detail += fmt(" %s -%.1f%%", k, 100 * r);
    }
    detail += " (each >= 50%)";
    const json report = json::parse(read_text(s.run / "report" / "metrics.json"));
    const double dice = report["summary"]["dice"]["mean"];
    ok = ok && dice >= 0.6;
    detail += fmt("; training-clip Dice %.3f (>= 0.6); pipeline %.1f s (< 600 s)", dice, s.pipeline_seconds);
    ok = ok && s.pipeline_seconds < 600;
    return {ok, detail};
}

Outcome inference_contract(const Shared& s) {
    const harness::Paths paths{s.run};
    const Dataset ds = tasks::read_dataset(paths.data());
    const Checkpoint brain_ckpt = load_checkpoint(paths.brain_ckpt());
    const Checkpoint dec_ckpt = load_checkpoint(paths.decoupler_ckpt());
    const brain::StubFrozenEncoder enc(s.cfg.model.tokens, s.cfg.model.text_tokens, s.cfg.model.width, s.cfg.seed);
    const decoupler::StubLatentCodec codec(s.cfg.model.latent_channels, s.cfg.seed);
    const inference::StubT2VBackend backend;

    bool ok = true;
    double mask_lo = 1, mask_hi = 0;
    std::size_t frames_out = 0;
    int identical = 0;
    for (const auto& sample : ds.samples) {
        ok = ok && sample.clip.frames.size() == 6;
        const auto a = inference::reconstruct_video(sample.fmri, brain_ckpt, dec_ckpt, s.cfg, enc, codec, backend, 42);
        const auto b = inference::reconstruct_video(sample.fmri, brain_ckpt, dec_ckpt, s.cfg, enc, codec, backend, 42);
        frames_out = a.video.size();
        ok = ok && a.video.size() == 16 && a.fps == 8.0;
        for (const auto& m : a.bundle.rescaled_masks) {
            for (double v : m.data) {
                mask_lo = std::min(mask_lo, v);
                mask_hi = std::max(mask_hi, v);
            }
        }
        const bool same = a.video == b.video && a.key_masks == b.key_masks &&
                          a.bundle.control_image == b.bundle.control_image &&
                          a.bundle.blurry_video == b.bundle.blurry_video && a.bundle.prompt == b.bundle.prompt;
        identical += same;
    }
    const int n = static_cast<int>(ds.samples.size());
    ok = ok && mask_lo >= 0.5 && mask_hi <= 1.0 && identical == n;
    return {ok, fmt("6 frames @ 3 FPS in, %zu frames @ 8 FPS out; conditioning masks in [%.3f, %.3f]; "
                    "%d/%d samples bit-identical across two runs",
                    frames_out, mask_lo, mask_hi, identical, n)};
}

// ---------------------------------------------------------------- 8

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(NEURONS_CLI) + " " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end_report(const Shared& s) {
    const fs::path out = scratch("cli");
    fs::create_directories(out);
    const int code = run_cli("run --out '" + out.string() + "'", out / "run.log");
    if (code != 0) return {false, fmt("neurons run exited with %d", code)};
    const json report = json::parse(read_text(out / "report" / "metrics.json"));
    const std::string table = read_text(out / "report" / "metrics.txt");
    const int n = report["sample_count"];
    int populated = 0;
    for (const auto& name : eval::kMetricNames) {
        const auto& st = report["summary"][name];
        populated += st.contains("mean") && st.contains("std") && std::isfinite(st["mean"].get<double>()) &&
                     std::isfinite(st["std"].get<double>());
    }
    const bool tables = table.find("Video-based") != std::string::npos &&
                        table.find("Frame-based") != std::string::npos && table.find("±") != std::string::npos;
    // the library run of criterion 6 used the same default config
    const bool same_as_library =
        read_text(out / "report" / "metrics.json") == read_text(s.run / "report" / "metrics.json");

    const int gt_code = run_cli("report --ground-truth --out '" + out.string() + "'", out / "gt.log");
    if (gt_code != 0) return {false, fmt("neurons report --ground-truth exited with %d", gt_code)};
    const json gt = json::parse(read_text(out / "report" / "gt_self.json"));
    const double two_way = gt["summary"]["video_2way"]["mean"];
    const double frame_two_way = gt["summary"]["frame_2way"]["mean"];
    const double ssim = gt["summary"]["ssim"]["mean"];
    const double dice = gt["summary"]["dice"]["mean"];
    const int metrics = static_cast<int>(eval::kMetricNames.size());
    const bool ok = n >= 8 && populated == metrics && tables && same_as_library && two_way == 1.0 &&
                    frame_two_way == 1.0 && ssim == 1.0 && dice == 1.0;
    return {ok, fmt("%d samples, %d/%d metrics with mean±std, tables %s, matches library run: %s; "
                    "GT-vs-GT 2-way %.3f (frame %.3f), SSIM %.6f, Dice %.3f",
                    n, populated, metrics, tables ? "ok" : "missing", same_as_library ? "yes" : "no",
                    two_way, frame_two_way, ssim, dice)};
}

}  // namespace

int main() {
    Shared shared;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient suite", gradient_suite},
        {"BiMixCo reduction to InfoNCE", bimixco_reduction},
        {"scheduler suite", scheduler_suite},
        {"key-object oracle", key_object_oracle},
        {"metric references", metric_references},
        {"overfit smoke", [&] { return overfit_smoke(shared); }},
        {"inference contract", [&] { return inference_contract(shared); }},
        {"end-to-end report", [&] { return end_to_end_report(shared); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
