#include "neurons/harness/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iomanip>
#include <sstream>

#include "neurons/brain/train.hpp"
#include "neurons/common/fileio.hpp"
#include "neurons/common/hashing.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/decoupler/train.hpp"
#include "neurons/eval/report.hpp"
#include "neurons/inference/reconstruct.hpp"
#include "neurons/tasks/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace neurons::harness {

namespace {

constexpr int kManifestFormat = 1;

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string digest(const fs::path& p) {
    if (fs::is_directory(p)) return sha256_tree(p);
    if (fs::is_regular_file(p)) return sha256_file(p);
    return "";
}

// Shared, deterministic stand-ins for the frozen pretrained components.
struct Backbones {
    brain::StubFrozenEncoder encoder;
    decoupler::StubLatentCodec codec;

    explicit Backbones(const ExperimentConfig& cfg)
        : encoder(cfg.model.tokens, cfg.model.text_tokens, cfg.model.width, cfg.seed),
          codec(cfg.model.latent_channels, cfg.seed) {}
};

struct StageContext {
    const ExperimentConfig& cfg;
    const Paths& paths;
    Backbones& backbones;
};

// Each stage returns its named outputs (paths relative to the run root) and
// a summary that is copied into the manifest.
struct StageOutput {
    std::map<std::string, fs::path> files;
    json summary = json::object();
};

json prepare_data_in(const ExperimentConfig& cfg, const fs::path& data) {
    const Dataset ds = tasks::generate_synthetic_dataset(cfg.dataset, cfg.seed);
    fs::remove_all(data);
    tasks::write_dataset(data, ds);
    return {{"clips", ds.samples.size()}};
}

json train_brain_in(const ExperimentConfig& cfg, const Backbones& bb, const fs::path& data,
                    const fs::path& out) {
    const Dataset ds = tasks::read_dataset(data);
    const auto r = brain::train_brain_model(ds, cfg, bb.encoder);
    save_checkpoint(r.checkpoint, out);
    const double first = r.curve.front().total(), last = r.curve.back().total();
    return {{"epochs", r.curve.size()},
            {"loss_first", first},
            {"loss_last", last},
            {"reduction", 1.0 - last / first}};
}

json train_decoupler_in(const ExperimentConfig& cfg, const Backbones& bb, const fs::path& data,
                        const fs::path& brain_path, const fs::path& out, const fs::path& log,
                        const fs::path& last_good) {
    const Dataset ds = tasks::read_dataset(data);
    const Checkpoint brain_ckpt = load_checkpoint(brain_path);
    if (log.has_parent_path()) fs::create_directories(log.parent_path());
    fs::remove(log);
    fs::remove(last_good);
    decoupler::DecouplerTrainOptions opts;
    opts.log_path = log;
    opts.last_good_path = last_good;
    const auto r = decoupler::train_decoupler(ds, brain_ckpt, cfg, bb.encoder, bb.codec, opts);
    save_checkpoint(r.checkpoint, out);
    json summary{{"epochs", r.epoch_losses.size()}};
    const char* names[] = {"seg", "cls", "txt", "rec"};
    for (std::size_t i = 0; i < 4; ++i) {
        const double first = r.epoch_losses.front()[i], last = r.epoch_losses.back()[i];
        summary[names[i]] = {{"loss_first", first}, {"loss_last", last}, {"reduction", 1.0 - last / first}};
    }
    return summary;
}

json infer_in(const ExperimentConfig& cfg, const Backbones& bb, const fs::path& data,
              const fs::path& brain_path, const fs::path& decoupler_path, const fs::path& run,
              const fs::path& backend_dir) {
    const Dataset ds = tasks::read_dataset(data);
    const Checkpoint brain_ckpt = load_checkpoint(brain_path);
    const Checkpoint dec_ckpt = load_checkpoint(decoupler_path);
    const inference::Reconstructor rec(brain_ckpt, dec_ckpt, cfg, bb.encoder, bb.codec);
    const auto backend = inference::make_backend(cfg.inference.backend, backend_dir);
    const inference::StubControlImageBackend control;
    const std::string config_hash = cfg.hash();
    fs::remove_all(run);
    for (const auto& s : ds.samples) {
        const int id = s.fmri.clip_id;
        const std::uint64_t seed = derive_seed(cfg.seed, "infer." + std::to_string(id));
        const auto r = rec.run(s.fmri.voxels, *backend, control, seed);
        inference::write_reconstruction(run / inference::sample_dirname(id), r,
                                        {{"clip_id", id},
                                         {"backend", backend->name()},
                                         {"seed", seed},
                                         {"root_seed", cfg.seed},
                                         {"config_hash", config_hash}});
    }
    return {{"samples", ds.samples.size()}, {"backend", backend->name()}};
}

StageOutput prepare_data(const StageContext& c) {
    return {{{"data", "data"}}, prepare_data_in(c.cfg, c.paths.data())};
}

StageOutput train_brain(const StageContext& c) {
    return {{{"brain", "checkpoints/brain.ckpt"}},
            train_brain_in(c.cfg, c.backbones, c.paths.data(), c.paths.brain_ckpt())};
}

StageOutput train_decoupler(const StageContext& c) {
    return {{{"decoupler", "checkpoints/decoupler.ckpt"}, {"train_log", "logs/decoupler.csv"}},
            train_decoupler_in(c.cfg, c.backbones, c.paths.data(), c.paths.brain_ckpt(),
                               c.paths.decoupler_ckpt(), c.paths.train_log(), c.paths.last_good())};
}

StageOutput infer(const StageContext& c) {
    return {{{"run", "run"}},
            infer_in(c.cfg, c.backbones, c.paths.data(), c.paths.brain_ckpt(),
                     c.paths.decoupler_ckpt(), c.paths.run(), c.paths.root / "backend")};
}

struct EvalStack {
    eval::StubClassifier classifier;
    eval::LexiconPosTagger tagger;
    eval::StubWordEmbedder words;

    explicit EvalStack(const ExperimentConfig& cfg)
        : classifier(cfg.eval.num_labels, cfg.seed),
          tagger(tasks::verb_lexicon()),
          words(eval::StubWordEmbedder::standard(cfg.seed)) {}
};

eval::MetricReport evaluate(const ExperimentConfig& cfg, const Backbones& bb, const fs::path& run,
                            const fs::path& data, const fs::path& stem,
                            const std::string& method = "ours") {
    const EvalStack stack(cfg);
    const eval::EvalBackends backends{stack.classifier, bb.encoder, stack.tagger, stack.words};
    return eval::emit_report(run, data, stem, backends, cfg.eval, derive_seed(cfg.seed, "eval"),
                             method);
}

StageOutput evaluate_stage(const StageContext& c) {
    const auto report = evaluate(c.cfg, c.backbones, c.paths.run(), c.paths.data(), c.paths.report());
    json means = json::object();
    for (const auto& [k, st] : report.summary) means[k] = st.mean;
    return {{{"report_json", "report/metrics.json"},
             {"report_csv", "report/metrics.csv"},
             {"report_txt", "report/metrics.txt"}},
            {{"samples", report.samples.size()}, {"mean", means}}};
}

using StageFn = std::function<StageOutput(const StageContext&)>;

const std::map<std::string, StageFn>& stage_table() {
    static const std::map<std::string, StageFn> t{{"prepare-data", prepare_data},
                                                  {"train-brain", train_brain},
                                                  {"train-decoupler", train_decoupler},
                                                  {"infer", infer},
                                                  {"eval", evaluate_stage}};
    return t;
}

std::size_t stage_index(const std::string& name) {
    const auto it = std::find(kStages.begin(), kStages.end(), name);
    if (it == kStages.end()) throw ConfigError("unknown stage '" + name + "'");
    return static_cast<std::size_t>(it - kStages.begin());
}

json fresh_manifest(const ExperimentConfig& cfg) {
    json m;
    m["format"] = kManifestFormat;
    m["config_hash"] = cfg.hash();
    m["config"] = cfg.to_json();
    m["stages"] = json::object();
    for (const auto& s : kStages) m["stages"][s] = {{"status", "pending"}};
    m["lineage"] = json::array();
    m["report"] = nullptr;
    m["timings"] = json::object();
    return m;
}

bool outputs_verify(const fs::path& root, const json& outputs) {
    for (const auto& [label, entry] : outputs.items()) {
        if (digest(root / entry.at("path").get<std::string>()) != entry.at("sha256")) return false;
    }
    return true;
}

// Upstream outputs a stage consumes: everything produced before it.
json stage_inputs(const json& manifest, std::size_t index) {
    json in = json::object();
    for (std::size_t i = 0; i < index; ++i) {
        const auto& st = manifest["stages"][kStages[i]];
        if (st.contains("outputs"))
            for (const auto& [label, entry] : st["outputs"].items()) in[label] = entry.at("sha256");
    }
    return in;
}

void refresh_lineage(json& m) {
    m["lineage"] = json::array();
    for (const auto& s : kStages) {
        const auto& st = m["stages"][s];
        if (st.value("status", "") != "done") break;
        json step{{"stage", s}, {"inputs", st["inputs"]}, {"outputs", json::object()}};
        for (const auto& [label, entry] : st["outputs"].items()) step["outputs"][label] = entry.at("sha256");
        m["lineage"].push_back(step);
    }
    const auto& ev = m["stages"]["eval"];
    m["report"] = ev.value("status", "") == "done" ? json("report/metrics.json") : json(nullptr);
}

void save_manifest(const Paths& paths, json& m) {
    refresh_lineage(m);
    write_file_atomic(paths.manifest(), m.dump(2) + "\n");
}

}  // namespace

json strip_timings(json manifest) {
    manifest.erase("timings");
    return manifest;
}

ExperimentConfig effective_config(ExperimentConfig cfg) {
    if (const char* env = std::getenv("NEURONS_BACKEND"); env && *env) cfg.inference.backend = env;
    validate(cfg);
    if (cfg.inference.backend == "external") {
        const char* cmd = std::getenv("NEURONS_T2V_COMMAND");
        if (!cmd || !*cmd) throw ConfigError("backend 'external' needs NEURONS_T2V_COMMAND");
    }
    return cfg;
}

PipelineResult run_pipeline(const ExperimentConfig& requested, const fs::path& out,
                            const PipelineOptions& options) {
    const ExperimentConfig cfg = effective_config(requested);
    const Paths paths{out};
    fs::create_directories(out);
    const std::size_t last = options.until ? stage_index(*options.until) : kStages.size() - 1;

    json manifest = fresh_manifest(cfg);
    if (!options.force && fs::exists(paths.manifest())) {
        try {
            json prev = json::parse(read_text(paths.manifest()));
            if (prev.value("format", 0) == kManifestFormat && prev.value("config_hash", "") == cfg.hash())
                manifest = std::move(prev);
        } catch (const json::exception&) {
            // unreadable manifest: start over
        }
    }

    Backbones backbones(cfg);
    const StageContext ctx{cfg, paths, backbones};
    PipelineResult result;
    for (std::size_t i = 0; i <= last; ++i) {
        const std::string& name = kStages[i];
        json& st = manifest["stages"][name];
        const json inputs = stage_inputs(manifest, i);
        const bool reusable = !options.force && st.value("status", "") == "done" &&
                              st.value("inputs", json()) == inputs &&
                              outputs_verify(out, st.value("outputs", json::object()));
        if (reusable) {
            result.skipped.push_back(name);
            continue;
        }
        const std::string started = utc_now();
        const auto t0 = std::chrono::steady_clock::now();
        st = {{"status", "running"}, {"inputs", inputs}};
        save_manifest(paths, manifest);
        try {
            const StageOutput o = stage_table().at(name)(ctx);
            json outputs = json::object();
            for (const auto& [label, rel] : o.files)
                outputs[label] = {{"path", rel.generic_string()}, {"sha256", digest(out / rel)}};
            st = {{"status", "done"}, {"inputs", inputs}, {"outputs", outputs}, {"summary", o.summary}};
        } catch (const std::exception& e) {
            st = {{"status", "failed"}, {"inputs", inputs}, {"error", e.what()}};
            for (std::size_t j = i + 1; j < kStages.size(); ++j) {
                manifest["stages"][kStages[j]] = {{"status", "pending"}};
                manifest["timings"].erase(kStages[j]);
            }
            manifest["timings"][name] = {
                {"started", started},
                {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
            save_manifest(paths, manifest);
            if (dynamic_cast<const ConfigError*>(&e)) throw;
            throw StageError(name, e.what());
        }
        manifest["timings"][name] = {
            {"started", started},
            {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
        save_manifest(paths, manifest);
        result.executed.push_back(name);
    }
    save_manifest(paths, manifest);
    result.manifest = manifest;
    return result;
}

std::vector<std::string> verify_manifest(const fs::path& out) {
    const Paths paths{out};
    if (!fs::exists(paths.manifest())) return {"manifest.json missing"};
    const json m = json::parse(read_text(paths.manifest()));
    std::vector<std::string> problems;
    for (const auto& s : kStages) {
        const auto& st = m["stages"][s];
        if (st.value("status", "") != "done") continue;
        for (const auto& [label, entry] : st["outputs"].items()) {
            const std::string rel = entry.at("path");
            const std::string d = digest(out / rel);
            if (d.empty()) problems.push_back(s + ": " + rel + " missing");
            else if (d != entry.at("sha256")) problems.push_back(s + ": " + rel + " hash mismatch");
        }
    }
    return problems;
}

json evaluate_paths(const ExperimentConfig& requested, const fs::path& run_dir, const fs::path& gt_dir,
                    const fs::path& stem, const std::string& method) {
    const ExperimentConfig cfg = effective_config(requested);
    const Backbones bb(cfg);
    return evaluate(cfg, bb, run_dir, gt_dir, stem, method).to_json();
}

json prepare_data_at(const ExperimentConfig& requested, const fs::path& data_dir) {
    return prepare_data_in(effective_config(requested), data_dir);
}

json train_brain_at(const ExperimentConfig& requested, const fs::path& data_dir, const fs::path& out) {
    const ExperimentConfig cfg = effective_config(requested);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    return train_brain_in(cfg, Backbones(cfg), data_dir, out);
}

json train_decoupler_at(const ExperimentConfig& requested, const fs::path& data_dir,
                        const fs::path& brain_ckpt, const fs::path& out) {
    const ExperimentConfig cfg = effective_config(requested);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    fs::path log = out, last_good = out;
    log.replace_extension(".csv");
    last_good.replace_extension(".last_good.ckpt");
    return train_decoupler_in(cfg, Backbones(cfg), data_dir, brain_ckpt, out, log, last_good);
}

json infer_at(const ExperimentConfig& requested, const fs::path& data_dir, const fs::path& brain_ckpt,
              const fs::path& decoupler_ckpt, const fs::path& run_dir) {
    const ExperimentConfig cfg = effective_config(requested);
    fs::path backend_dir = run_dir;
    backend_dir += ".backend";
    return infer_in(cfg, Backbones(cfg), data_dir, brain_ckpt, decoupler_ckpt, run_dir, backend_dir);
}

json evaluate_directory(const ExperimentConfig& cfg, const fs::path& out, const fs::path& run_dir,
                        const std::string& stem) {
    return evaluate_paths(cfg, run_dir, Paths{out}.data(), out / "report" / stem, stem);
}

json ground_truth_self_report(const ExperimentConfig& cfg, const fs::path& out) {
    const Paths paths{out};
    const fs::path gt_run = out / "gt_run";
    fs::remove_all(gt_run);
    eval::write_ground_truth_run(tasks::read_dataset(paths.data()), gt_run);
    return evaluate_paths(cfg, gt_run, paths.data(), out / "report" / "gt_self", "ground truth");
}

}  // namespace neurons::harness
