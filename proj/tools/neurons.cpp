// neurons: command-line entry point for the experiment pipeline.
//
//   neurons run --config cfg.json --out runs/a
//   neurons train-brain --out runs/a          (runs prepare-data first if needed)
//   neurons eval --run DIR --gt DATA_DIR --out report   (report.{json,csv,txt})
//   neurons report --out runs/a [--run DIR | --ground-truth]
//
// Stage commands given explicit inputs run that stage alone, with --out
// naming its output:
//   neurons prepare-data --spec cfg.json --out data
//   neurons train-brain --data data --out brain.ckpt
//   neurons train-decoupler --data data --brain brain.ckpt --out dec.ckpt
//   neurons infer --data data --brain brain.ckpt --decoupler dec.ckpt --out run
//
// Exit codes: 0 ok, 2 configuration error, 3 stage failure.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "neurons/common/fileio.hpp"
#include "neurons/harness/pipeline.hpp"

namespace fs = std::filesystem;
using namespace neurons;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> repeats;
    std::string out = "neurons_out";
    std::optional<std::string> backend;
    bool force = false;
};

// Explicit inputs for single-stage mode.
struct StageInputs {
    std::string spec, data, brain, decoupler;
    bool any() const { return !spec.empty() || !data.empty() || !brain.empty() || !decoupler.empty(); }
};

std::string need(const std::string& value, const std::string& flag, const std::string& stage) {
    if (value.empty()) throw ConfigError(stage + " needs " + flag);
    return value;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON config file (defaults apply when omitted)");
    cmd->add_option("--seed", c.seed, "root seed override");
    cmd->add_option("--repeats", c.repeats, "N-way test repeats override")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

ExperimentConfig resolve(const Common& c, const std::string& spec) {
    if (!spec.empty() && !c.config.empty()) throw ConfigError("--spec and --config are exclusive");
    const std::string& file = spec.empty() ? c.config : spec;
    ExperimentConfig cfg = file.empty() ? ExperimentConfig{} : load_config(file);
    if (c.seed) cfg.seed = *c.seed;
    if (c.backend) cfg.inference.backend = *c.backend;
    if (c.repeats) cfg.eval.repeats = *c.repeats;
    return harness::effective_config(cfg);
}

void print_summary(const harness::PipelineResult& r) {
    for (const auto& s : r.skipped) std::cout << "skipped  " << s << " (up to date)\n";
    for (const auto& s : r.executed) {
        std::cout << "ran      " << s << "  " << std::fixed << std::setprecision(2)
                  << r.manifest["timings"][s]["seconds"].get<double>() << " s\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fMRI-to-video decoding pipeline on synthetic data"};
    app.require_subcommand(1);

    Common common;
    std::string stage_cmd;
    std::string run_dir, gt_dir;
    StageInputs in;
    for (const auto& stage : harness::kStages) {
        const std::string help = stage == "eval"
                                     ? "run the pipeline through evaluation, or with --run evaluate a "
                                       "run directory and write the report to --out"
                                     : "run the pipeline through " + stage + ", or with explicit inputs run it alone";
        auto* cmd = app.add_subcommand(stage, help);
        add_common(cmd, common);
        cmd->add_flag("--force", common.force, "ignore the manifest and rerun every stage");
        cmd->callback([&, stage] { stage_cmd = stage; });
        if (stage == "prepare-data")
            cmd->add_option("--spec", in.spec, "config file describing the dataset; writes the dataset to --out");
        if (stage == "train-brain" || stage == "train-decoupler" || stage == "infer")
            cmd->add_option("--data", in.data, "dataset directory; runs this stage alone");
        if (stage == "train-decoupler" || stage == "infer")
            cmd->add_option("--brain", in.brain, "brain checkpoint");
        if (stage == "infer") {
            cmd->add_option("--decoupler", in.decoupler, "decoupler checkpoint");
            cmd->add_option("--backend", common.backend, "video backend (NEURONS_BACKEND wins)")
                ->check(CLI::IsMember({"stub", "external"}));
        }
        if (stage == "eval") {
            cmd->add_option("--run", run_dir, "run directory of sample_NNNN reconstructions");
            cmd->add_option("--gt", gt_dir, "ground-truth dataset directory (required with --run)");
        }
    }
    auto* run = app.add_subcommand("run", "run every stage and print the metric report");
    add_common(run, common);
    run->add_flag("--force", common.force, "ignore the manifest and rerun every stage");

    bool ground_truth = false;
    auto* report = app.add_subcommand("report", "print or compute a metric report");
    add_common(report, common);
    report->add_option("--run", run_dir, "evaluate this run directory against <out>/data");
    report->add_flag("--ground-truth", ground_truth, "evaluate the ground truth against itself");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const ExperimentConfig cfg = resolve(common, in.spec);
        const fs::path out = common.out;
        if (in.any()) {
            nlohmann::json summary;
            if (stage_cmd == "prepare-data") {
                summary = harness::prepare_data_at(cfg, out);
            } else if (stage_cmd == "train-brain") {
                summary = harness::train_brain_at(cfg, need(in.data, "--data", stage_cmd), out);
            } else if (stage_cmd == "train-decoupler") {
                summary = harness::train_decoupler_at(cfg, need(in.data, "--data", stage_cmd),
                                                      need(in.brain, "--brain", stage_cmd), out);
            } else {
                summary = harness::infer_at(cfg, need(in.data, "--data", stage_cmd),
                                            need(in.brain, "--brain", stage_cmd),
                                            need(in.decoupler, "--decoupler", stage_cmd), out);
            }
            std::cout << stage_cmd << " -> " << out.string() << '\n' << summary.dump(2) << '\n';
            return 0;
        }
        if (stage_cmd == "eval" && !run_dir.empty()) {
            if (gt_dir.empty()) throw ConfigError("eval --run needs --gt");
            harness::evaluate_paths(cfg, run_dir, gt_dir, out);
            fs::path txt = out;
            txt.replace_extension(".txt");
            std::cout << read_text(txt);
            return 0;
        }
        if (run->parsed() || !stage_cmd.empty()) {
            harness::PipelineOptions opts;
            opts.force = common.force;
            if (!stage_cmd.empty()) opts.until = stage_cmd;
            const auto r = harness::run_pipeline(cfg, out, opts);
            print_summary(r);
            if (run->parsed()) std::cout << '\n' << read_text(harness::Paths{out}.report().string() + ".txt");
            std::cout << "manifest: " << harness::Paths{out}.manifest().string() << '\n';
            return 0;
        }
        if (ground_truth) {
            harness::ground_truth_self_report(cfg, out);
            std::cout << read_text(out / "report" / "gt_self.txt");
        } else if (!run_dir.empty()) {
            const std::string stem = fs::path(run_dir).filename().string();
            harness::evaluate_directory(cfg, out, run_dir, stem);
            std::cout << read_text(out / "report" / (stem + ".txt"));
        } else {
            std::cout << read_text(harness::Paths{out}.report().string() + ".txt");
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return kExitStage;
    }
}
