#include "neurons/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/common/fileio.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/inference/conditioning.hpp"
#include "neurons/inference/reconstruct.hpp"

namespace fs = std::filesystem;

namespace neurons::eval {

namespace {

std::string chomp(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

std::vector<Image> read_sequence(const fs::path& dir, const char* ext) {
    std::vector<Image> out;
    for (int f = 0;; ++f) {
        const fs::path p = dir / tasks::frame_filename(f, ext);
        if (!fs::exists(p)) break;
        out.push_back(read_netpbm(p));
    }
    return out;
}

std::string fmt(double v, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

}  // namespace

std::vector<RunSample> read_run(const fs::path& run_dir, std::vector<std::string>* skipped) {
    if (!fs::is_directory(run_dir)) throw DomainError("run directory not found: " + run_dir.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(run_dir))
        if (e.is_directory() && e.path().filename().string().rfind("sample_", 0) == 0) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<RunSample> out;
    for (const auto& d : dirs) {
        try {
            RunSample s;
            s.clip_id = nlohmann::json::parse(read_text(d / "meta.json")).at("clip_id").get<int>();
            s.video = read_sequence(d / "frames", "ppm");
            s.masks = read_sequence(d / "masks", "pgm");
            s.caption = chomp(read_text(d / "bundle" / "prompt.txt"));
            if (s.video.size() < 2) throw Error("fewer than two frames");
            out.push_back(std::move(s));
        } catch (const std::exception& e) {
            if (skipped) skipped->push_back(d.filename().string() + ": " + e.what());
        }
    }
    return out;
}

void write_ground_truth_run(const Dataset& dataset, const fs::path& dir) {
    for (const auto& s : dataset.samples) {
        const fs::path d = dir / inference::sample_dirname(s.fmri.clip_id);
        const Video& frames = s.clip.frames;
        fs::create_directories(d / "frames");
        fs::create_directories(d / "masks");
        for (std::size_t f = 0; f < frames.size(); ++f)
            write_netpbm(d / "frames" / tasks::frame_filename(static_cast<int>(f), "ppm"), frames[f]);
        for (std::size_t f = 0; f < s.annotations.key_masks.size(); ++f)
            write_netpbm(d / "masks" / tasks::frame_filename(static_cast<int>(f), "pgm"),
                         s.annotations.key_masks[f]);
        write_file_atomic(d / "bundle" / "prompt.txt", s.annotations.caption_text + "\n");
        const nlohmann::json meta{{"clip_id", s.fmri.clip_id}, {"kind", "ground_truth"},
                                  {"frames", frames.size()}};
        write_file_atomic(d / "meta.json", meta.dump(2) + "\n");
    }
}

SampleMetrics evaluate_sample(const RunSample& pred, const DatasetSample& gt,
                              const EvalBackends& backends, const CiderD& cider,
                              const EvalConfig& cfg, std::uint64_t seed) {
    SampleMetrics m;
    m.clip_id = pred.clip_id;
    auto& v = m.values;

    // ground truth resampled to the prediction's frame count
    const auto& gt_frames = gt.clip.frames;
    const Video gt_video =
        gt_frames.size() == pred.video.size()
            ? gt_frames
            : inference::interpolate_fps(gt_frames, static_cast<double>(gt_frames.size()),
                                         static_cast<double>(pred.video.size()));
    require_shape(gt_video.size() == pred.video.size(), "cannot align prediction and ground truth frames");

    const int labels = backends.classifier.num_labels();
    const int n50 = std::min(50, labels);
    const RowVec gt_probs = backends.classifier.class_probs(gt_video);
    const RowVec pred_probs = backends.classifier.class_probs(pred.video);
    v["video_2way"] = nway_topk(gt_probs, pred_probs, 2, 1, cfg.repeats, derive_seed(seed, "video.2"));
    v["video_50way"] = nway_topk(gt_probs, pred_probs, n50, 1, cfg.repeats, derive_seed(seed, "video.50"));

    const PccResult pcc = clip_pcc(pred.video, backends.embedder);
    v["clip_pcc"] = pcc.score;
    if (pcc.excluded) m.flags.push_back("clip_pcc: " + std::to_string(pcc.excluded) + " zero-norm pairs excluded");

    double f2 = 0, f50 = 0, ss = 0, ps = 0;
    int capped = 0;
    for (std::size_t f = 0; f < pred.video.size(); ++f) {
        const RowVec gp = backends.classifier.class_probs(gt_video[f]);
        const RowVec pp = backends.classifier.class_probs(pred.video[f]);
        const std::string tag = "frame." + std::to_string(f);
        f2 += nway_topk(gp, pp, 2, 1, cfg.repeats, derive_seed(seed, tag + ".2"));
        f50 += nway_topk(gp, pp, n50, 1, cfg.repeats, derive_seed(seed, tag + ".50"));
        ss += ssim(pred.video[f], gt_video[f]);
        const PsnrResult p = psnr(pred.video[f], gt_video[f]);
        ps += p.db;
        capped += p.capped;
    }
    const auto frames = static_cast<double>(pred.video.size());
    v["frame_2way"] = f2 / frames;
    v["frame_50way"] = f50 / frames;
    v["ssim"] = ss / frames;
    v["psnr"] = ps / frames;
    if (capped) m.flags.push_back("psnr: " + std::to_string(capped) + " identical frames capped at 100 dB");

    const auto& gt_masks = gt.annotations.key_masks;
    require_shape(pred.masks.size() == gt_masks.size(), "predicted and reference mask counts differ");
    double d = 0;
    int empty = 0;
    for (std::size_t f = 0; f < gt_masks.size(); ++f) {
        const DiceResult r = dice(pred.masks[f], gt_masks[f]);
        d += r.score;
        empty += r.both_empty;
    }
    v["dice"] = gt_masks.empty() ? 0.0 : d / static_cast<double>(gt_masks.size());
    if (empty) m.flags.push_back("dice: " + std::to_string(empty) + " frames with both masks empty");

    const std::vector<std::string> refs{gt.annotations.caption_text};
    const CaptionScores cs = caption_metrics(pred.caption, refs, cider);
    for (std::size_t n = 0; n < 4; ++n) v["bleu" + std::to_string(n + 1)] = cs.bleu[n];
    v["cider"] = cs.cider;
    const VerbAccuracy va = verb_accuracy(pred.caption, gt.annotations.caption_text, backends.tagger,
                                          backends.words, cfg.verb_threshold);
    v["verb_acc"] = va.accuracy;
    if (va.no_verbs) m.flags.push_back("verb_acc: prediction has no verbs");
    return m;
}

MetricReport evaluate_run(const std::vector<RunSample>& run, const Dataset& gt,
                          const EvalBackends& backends, const EvalConfig& cfg, std::uint64_t seed) {
    if (run.empty()) throw DomainError("run contains no samples");
    std::map<int, const DatasetSample*> by_id;
    for (const auto& s : gt.samples) by_id[s.fmri.clip_id] = &s;

    MetricReport report;
    std::vector<std::vector<std::string>> corpus;
    for (const auto& s : gt.samples) corpus.push_back({s.annotations.caption_text});
    const CiderD cider(corpus);

    std::set<int> seen;
    for (const auto& p : run) {
        auto it = by_id.find(p.clip_id);
        if (it == by_id.end() || !seen.insert(p.clip_id).second) {
            report.unpaired.push_back("run sample " + std::to_string(p.clip_id) + " has no ground truth");
            continue;
        }
        try {
            report.samples.push_back(evaluate_sample(p, *it->second, backends, cider, cfg,
                                                     derive_seed(seed, "eval." + std::to_string(p.clip_id))));
        } catch (const ShapeError& e) {
            report.unpaired.push_back("run sample " + std::to_string(p.clip_id) + ": " + e.what());
        }
    }
    for (const auto& [id, s] : by_id)
        if (!seen.count(id)) report.unpaired.push_back("ground truth " + std::to_string(id) + " has no prediction");
    if (report.samples.empty()) throw DomainError("no paired samples to evaluate");

    const auto n = static_cast<double>(report.samples.size());
    for (const auto& name : kMetricNames) {
        double sum = 0;
        for (const auto& s : report.samples) sum += s.values.at(name);
        const double mean = sum / n;
        double sq = 0;
        for (const auto& s : report.samples) sq += (s.values.at(name) - mean) * (s.values.at(name) - mean);
        report.summary[name] = {mean, n > 1 ? std::sqrt(sq / (n - 1)) : 0.0};
    }
    return report;
}

MetricReport emit_report(const fs::path& run_dir, const fs::path& gt_dir, const fs::path& out,
                         const EvalBackends& backends, const EvalConfig& cfg, std::uint64_t seed,
                         const std::string& method) {
    std::vector<std::string> skipped;
    const auto run = read_run(run_dir, &skipped);
    const Dataset gt = tasks::read_dataset(gt_dir);
    MetricReport report = evaluate_run(run, gt, backends, cfg, seed);
    for (auto& s : skipped) report.unpaired.push_back("unreadable " + s);
    report.method = method;

    fs::path stem = out;
    stem.replace_extension();
    write_file_atomic(stem.string() + ".json", report.to_json().dump(2) + "\n");
    write_file_atomic(stem.string() + ".csv", report.to_csv());
    write_file_atomic(stem.string() + ".txt", report.to_table());
    return report;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["sample_count"] = samples.size();
    for (const auto& name : kMetricNames) {
        const Stat& s = summary.at(name);
        j["summary"][name] = {{"mean", s.mean}, {"std", s.std}};
    }
    j["samples"] = nlohmann::json::array();
    for (const auto& s : samples) {
        nlohmann::json row{{"clip_id", s.clip_id}, {"flags", s.flags}};
        for (const auto& [k, v] : s.values) row[k] = v;
        j["samples"].push_back(row);
    }
    j["unpaired"] = unpaired;
    return j;
}

std::string MetricReport::to_csv() const {
    std::ostringstream s;
    s << std::setprecision(10) << "clip_id";
    for (const auto& name : kMetricNames) s << ',' << name;
    s << '\n';
    for (const auto& row : samples) {
        s << row.clip_id;
        for (const auto& name : kMetricNames) s << ',' << row.values.at(name);
        s << '\n';
    }
    for (const char* which : {"mean", "std"}) {
        s << which;
        for (const auto& name : kMetricNames) {
            const Stat& st = summary.at(name);
            s << ',' << (which[0] == 'm' ? st.mean : st.std);
        }
        s << '\n';
    }
    return s.str();
}

std::string MetricReport::to_table() const {
    auto cell = [&](const std::string& name, int precision = 3) {
        const Stat& st = summary.at(name);
        return fmt(st.mean, precision) + " ± " + fmt(st.std, precision);
    };
    auto row = [](std::initializer_list<std::string> cols) {
        std::ostringstream s;
        bool first = true;
        for (const auto& c : cols) {
            // pad by code points; "±" is two bytes
            const auto glyphs = std::count_if(c.begin(), c.end(), [](char ch) { return (ch & 0xC0) != 0x80; });
            const auto width = static_cast<std::ptrdiff_t>(first ? 12 : 18);
            s << (first ? "" : " | ") << c << std::string(static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, width - glyphs)), ' ');
            first = false;
        }
        std::string line = s.str();
        line.erase(line.find_last_not_of(' ') + 1);
        return line + "\n";
    };
    std::ostringstream t;
    t << "Video-based reconstruction (" << samples.size() << " samples)\n";
    t << row({"", "Semantic-level", "", "ST-level"});
    t << row({"Method", "2-way", "50-way", "CLIP-pcc"});
    t << row({method, cell("video_2way"), cell("video_50way"), cell("clip_pcc")});
    t << "\nFrame-based reconstruction\n";
    t << row({"", "Semantic-level", "", "Pixel-level", ""});
    t << row({"Method", "2-way", "50-way", "SSIM", "PSNR"});
    t << row({method, cell("frame_2way"), cell("frame_50way"), cell("ssim"), cell("psnr")});
    t << "\nKey-object segmentation\n";
    t << row({"Method", "Dice"});
    t << row({method, cell("dice")});
    t << "\nScene description\n";
    t << row({"Method", "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "CIDEr-D", "Verb acc"});
    t << row({method, cell("bleu1"), cell("bleu2"), cell("bleu3"), cell("bleu4"), cell("cider"),
              cell("verb_acc")});
    if (!unpaired.empty()) {
        t << "\nExcluded:\n";
        for (const auto& u : unpaired) t << "  " << u << "\n";
    }
    return t.str();
}

}  // namespace neurons::eval
