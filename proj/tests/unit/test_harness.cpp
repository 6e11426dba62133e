#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <openssl/sha.h>
#include <sys/wait.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

#include "neurons/common/fileio.hpp"
#include "neurons/common/hashing.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/harness/checkpoint.hpp"
#include "neurons/harness/config.hpp"
#include "neurons/harness/pipeline.hpp"

using namespace neurons;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("neurons_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string config_error(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.dataset.num_clips = 3;
    cfg.brain.epochs = 4;
    cfg.decoupler.epochs = 3;
    cfg.eval.repeats = 20;
    return cfg;
}

Checkpoint sample_checkpoint() {
    Checkpoint c;
    c.meta["kind"] = "test";
    Rng rng = make_rng(3, "ckpt");
    rng.discard(17);
    c.meta["rng"] = serialize_rng(rng);
    Mat a(2, 3);
    a << 1.0 / 3.0, -0.0, 1e-300, std::nextafter(1.0, 2.0), -7.25, 42;
    c.tensors["a"] = a;
    c.tensors["b"] = Mat::Constant(1, 4, 0.1);
    return c;
}

std::vector<unsigned char> reseal(std::vector<unsigned char> bytes) {
    const std::size_t body = bytes.size() - SHA256_DIGEST_LENGTH;
    SHA256(bytes.data(), body, bytes.data() + body);
    return bytes;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NEURONS_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct EnvGuard {
    std::vector<std::string> names;
    void set(const std::string& name, const std::string& value) {
        setenv(name.c_str(), value.c_str(), 1);
        names.push_back(name);
    }
    ~EnvGuard() {
        for (const auto& n : names) unsetenv(n.c_str());
    }
};

}  // namespace

TEST_CASE("config loading") {
    SUBCASE("minimal config takes every default") {
        CHECK(config_from_json(json::object()).to_json() == ExperimentConfig{}.to_json());
        CHECK(config_from_json(json::object()).hash() == ExperimentConfig{}.hash());
    }
    SUBCASE("clips are fixed at six frames") {
        const std::string e = config_error({{"dataset", {{"frames", 5}}}});
        CHECK(e.find("dataset.frames") != std::string::npos);
        CHECK(config_error({{"dataset", {{"frames", 6}}}}).empty());
    }
    SUBCASE("unknown keys are rejected by name") {
        CHECK(config_error({{"sead", 1}}).find("sead") != std::string::npos);
        CHECK(config_error({{"brain", {{"epoch", 3}}}}).find("brain.epoch") != std::string::npos);
    }
    SUBCASE("invariant violations name the field") {
        CHECK(config_error({{"model", {{"hidden", 0}}}}).find("model.hidden") != std::string::npos);
        CHECK(config_error({{"brain", {{"tau", -1.0}}}}).find("brain.tau") != std::string::npos);
        CHECK(config_error({{"inference", {{"backend", "gpu"}}}}).find("inference.backend") !=
              std::string::npos);
        CHECK(config_error({{"decoupler", {{"disabled_losses", {"seg", "foo"}}}}})
                  .find("decoupler.disabled_losses") != std::string::npos);
        CHECK_FALSE(config_error({{"brain", {{"lr", "fast"}}}}).empty());
    }
    SUBCASE("hash is stable under reserialisation and key order") {
        const fs::path dir = scratch("config");
        ExperimentConfig cfg;
        cfg.seed = 99;
        cfg.brain.lr = 3e-4;
        cfg.decoupler.disabled_losses = {"txt"};
        {
            std::ofstream(dir / "a.json") << cfg.to_json().dump(2);
        }
        // the same document with every object's keys in reverse order
        const std::function<nlohmann::ordered_json(const json&)> reverse = [&](const json& j) {
            if (!j.is_object()) return nlohmann::ordered_json(j);
            nlohmann::ordered_json o = nlohmann::ordered_json::object();
            std::vector<std::string> keys;
            for (const auto& [k, v] : j.items()) keys.push_back(k);
            for (auto it = keys.rbegin(); it != keys.rend(); ++it) o[*it] = reverse(j.at(*it));
            return o;
        };
        {
            std::ofstream(dir / "b.json") << reverse(cfg.to_json()).dump();
        }
        const ExperimentConfig a = load_config(dir / "a.json"), b = load_config(dir / "b.json");
        CHECK(a.hash() == cfg.hash());
        CHECK(b.hash() == cfg.hash());
        CHECK(a.to_json().dump() == cfg.to_json().dump());
        ExperimentConfig other = cfg;
        other.seed = 100;
        CHECK(other.hash() != cfg.hash());
        CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
        {
            std::ofstream(dir / "bad.json") << "{ seed: ";
        }
        CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    }
}

TEST_CASE("checkpoint persistence") {
    const fs::path dir = scratch("ckpt");
    const Checkpoint c = sample_checkpoint();

    SUBCASE("save, load, save is byte-identical") {
        save_checkpoint(c, dir / "a.ckpt");
        const Checkpoint back = load_checkpoint(dir / "a.ckpt");
        CHECK(back == c);
        CHECK(back.tensor_at("a")(0, 1) == 0.0);
        CHECK(std::signbit(back.tensor_at("a")(0, 1)));
        save_checkpoint(back, dir / "b.ckpt");
        CHECK(read_text(dir / "a.ckpt") == read_text(dir / "b.ckpt"));

        Rng expect = make_rng(3, "ckpt");
        expect.discard(17);
        Rng restored = deserialize_rng(back.meta_at("rng"));
        for (int i = 0; i < 10; ++i) CHECK(restored() == expect());
    }
    SUBCASE("truncated or corrupted files raise integrity errors") {
        const auto bytes = encode_checkpoint(c);
        for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
            CHECK_THROWS_AS(decode_checkpoint({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut)}),
                            IntegrityError);
        }
        auto flipped = bytes;
        flipped[bytes.size() / 2] ^= 0x01;
        CHECK_THROWS_AS(decode_checkpoint(flipped), IntegrityError);
        auto magic = bytes;
        magic[0] = 'X';
        CHECK_THROWS_AS(decode_checkpoint(magic), IntegrityError);

        save_checkpoint(c, dir / "t.ckpt");
        fs::resize_file(dir / "t.ckpt", fs::file_size(dir / "t.ckpt") - 3);
        CHECK_THROWS_AS(load_checkpoint(dir / "t.ckpt"), IntegrityError);
    }
    SUBCASE("newer format versions are refused") {
        auto bytes = encode_checkpoint(c);
        const std::uint32_t v = kCheckpointVersion + 1;
        std::memcpy(bytes.data() + 8, &v, sizeof v);
        CHECK_THROWS_AS(decode_checkpoint(reseal(bytes)), IntegrityError);
    }
    SUBCASE("v1 files migrate with a note") {
        const auto v1 = encode_checkpoint(c, 1);
        const Checkpoint m = decode_checkpoint(v1);
        CHECK(m.tensors.size() == c.tensors.size());
        CHECK(m.tensor_at("a") == c.tensor_at("a"));
        CHECK(m.meta_at("migration").find("v1") != std::string::npos);
        CHECK(m.meta_at("epoch") == "0");
        // a migrated checkpoint saves as the current version
        const auto v2 = encode_checkpoint(m);
        std::uint32_t version = 0;
        std::memcpy(&version, v2.data() + 8, sizeof version);
        CHECK(version == kCheckpointVersion);
        CHECK(decode_checkpoint(v2) == m);
    }
}

TEST_CASE("pipeline resume and determinism") {
    const ExperimentConfig cfg = small_config();
    const fs::path a = scratch("pipe_a"), b = scratch("pipe_b");

    const auto partial = harness::run_pipeline(cfg, a, {.until = "train-brain"});
    CHECK(partial.executed == std::vector<std::string>{"prepare-data", "train-brain"});
    CHECK(partial.manifest["lineage"].size() == 2);
    CHECK(partial.manifest["report"].is_null());

    const auto resumed = harness::run_pipeline(cfg, a);
    CHECK(resumed.skipped == std::vector<std::string>{"prepare-data", "train-brain"});
    CHECK(resumed.executed == std::vector<std::string>{"train-decoupler", "infer", "eval"});
    CHECK(resumed.manifest["lineage"].size() == 5);
    CHECK(resumed.manifest["report"] == "report/metrics.json");
    CHECK(harness::verify_manifest(a).empty());

    const auto again = harness::run_pipeline(cfg, a);
    CHECK(again.executed.empty());
    CHECK(again.skipped.size() == 5);

    SUBCASE("fresh directory with the same config matches exactly") {
        const auto other = harness::run_pipeline(cfg, b);
        CHECK(harness::strip_timings(other.manifest) == harness::strip_timings(resumed.manifest));
        CHECK(read_text(a / "report/metrics.json") == read_text(b / "report/metrics.json"));
        CHECK(read_text(a / "checkpoints/decoupler.ckpt") == read_text(b / "checkpoints/decoupler.ckpt"));
    }
    SUBCASE("deleted checkpoints are rebuilt and the report is unchanged") {
        const std::string before = read_text(a / "report/metrics.json");
        fs::remove(a / "checkpoints/brain.ckpt");
        fs::remove(a / "checkpoints/decoupler.ckpt");
        CHECK_FALSE(harness::verify_manifest(a).empty());
        const auto r = harness::run_pipeline(cfg, a);
        CHECK(r.executed == std::vector<std::string>{"train-brain", "train-decoupler"});
        CHECK(r.skipped == std::vector<std::string>{"prepare-data", "infer", "eval"});
        CHECK(read_text(a / "report/metrics.json") == before);
        CHECK(harness::verify_manifest(a).empty());
    }
    SUBCASE("tampered outputs are detected and regenerated") {
        const fs::path frame = a / "run" / "sample_0000" / "frames" / "000.ppm";
        const std::string original = read_text(frame);
        write_file_atomic(frame, original.substr(0, original.size() - 1) + "x");
        const auto problems = harness::verify_manifest(a);
        REQUIRE(problems.size() == 1);
        CHECK(problems[0].find("infer") == 0);
        const auto r = harness::run_pipeline(cfg, a);
        // the regenerated run is identical, so evaluation inputs still match
        CHECK(r.executed == std::vector<std::string>{"infer"});
        CHECK(r.skipped.back() == "eval");
        CHECK(read_text(frame) == original);
    }
    SUBCASE("a changed config starts a fresh lineage") {
        ExperimentConfig changed = cfg;
        changed.seed = cfg.seed + 1;
        const auto r = harness::run_pipeline(changed, a);
        CHECK(r.executed.size() == 5);
        CHECK(r.manifest["config_hash"] == changed.hash());
    }
    SUBCASE("force reruns everything") {
        CHECK(harness::run_pipeline(cfg, a, {.until = std::nullopt, .force = true}).executed.size() == 5);
    }
    CHECK_THROWS_AS(harness::run_pipeline(cfg, a, {.until = "train"}), ConfigError);
}

TEST_CASE("stage failure records partial lineage") {
    const fs::path out = scratch("pipe_fail");
    EnvGuard env;
    env.set("NEURONS_BACKEND", "external");
    env.set("NEURONS_T2V_COMMAND", "false");
    try {
        harness::run_pipeline(small_config(), out);
        FAIL("expected a stage failure");
    } catch (const harness::StageError& e) {
        CHECK(e.stage() == "infer");
    }
    const json m = json::parse(read_text(out / "manifest.json"));
    CHECK(m["config"]["inference"]["backend"] == "external");
    CHECK(m["lineage"].size() == 3);
    CHECK(m["lineage"][2]["stage"] == "train-decoupler");
    CHECK(m["stages"]["infer"]["status"] == "failed");
    CHECK_FALSE(m["stages"]["infer"]["error"].get<std::string>().empty());
    CHECK(m["stages"]["eval"]["status"] == "pending");
    CHECK(m["report"].is_null());
    CHECK(m["timings"].contains("infer"));
    CHECK(harness::verify_manifest(out).empty());

    env.set("NEURONS_T2V_COMMAND", "");
    CHECK_THROWS_AS(harness::run_pipeline(small_config(), out), ConfigError);
}

TEST_CASE("ground-truth self report") {
    const ExperimentConfig cfg = small_config();
    const fs::path out = scratch("pipe_gt");
    harness::run_pipeline(cfg, out, {.until = "prepare-data"});
    const json r = harness::ground_truth_self_report(cfg, out);
    CHECK(r["method"] == "ground truth");
    CHECK(r["sample_count"] == 3);
    for (const char* m : {"video_2way", "frame_2way", "video_50way", "ssim", "dice", "bleu4", "verb_acc"})
        CHECK(r["summary"][m]["mean"].get<double>() == 1.0);
    CHECK(r["summary"]["psnr"]["mean"].get<double>() == 100.0);
    CHECK(fs::exists(out / "report" / "gt_self.txt"));
}

TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli");
    {
        json j = small_config().to_json();
        std::ofstream(dir / "ok.json") << j.dump();
        j["dataset"]["frames"] = 5;
        std::ofstream(dir / "frames5.json") << j.dump();
        std::ofstream(dir / "unknown.json") << R"({"dataset": {"clips": 3}})";
    }
    const std::string out = " --out " + (dir / "run").string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("run --config " + (dir / "frames5.json").string() + out) == 2);
    CHECK(run_cli("run --config " + (dir / "unknown.json").string() + out) == 2);
    CHECK(run_cli("run --config " + (dir / "missing.json").string() + out) == 2);
    CHECK(run_cli("train-brain --config " + (dir / "ok.json").string() + out) == 0);
    CHECK(fs::exists(dir / "run" / "checkpoints" / "brain.ckpt"));
    CHECK_FALSE(fs::exists(dir / "run" / "checkpoints" / "decoupler.ckpt"));
    CHECK(run_cli("run --config " + (dir / "ok.json").string() + out) == 0);
    CHECK(fs::exists(dir / "run" / "report" / "metrics.txt"));
    CHECK(run_cli("report --ground-truth --config " + (dir / "ok.json").string() + out) == 0);
    const std::string report = (dir / "reports" / "standalone").string();
    CHECK(run_cli("eval --run " + (dir / "run" / "run").string() + " --gt " + (dir / "run" / "data").string() +
                  " --repeats 10 --config " + (dir / "ok.json").string() + " --out " + report) == 0);
    CHECK(fs::exists(report + ".csv"));
    CHECK(fs::exists(report + ".json"));
    CHECK(fs::exists(report + ".txt"));
    CHECK(run_cli("eval --run " + (dir / "run" / "run").string() + " --out " + report) == 2);
    CHECK(run_cli("run --repeats 0" + out) == 2);
    CHECK(run_cli("report --run " + (dir / "nowhere").string() + " --config " + (dir / "ok.json").string() + out) == 3);

    const std::string env = "NEURONS_BACKEND=external NEURONS_T2V_COMMAND=false ";
    const std::string failing = env + NEURONS_CLI + " run --config " + (dir / "ok.json").string() +
                                " --out " + (dir / "ext").string() + " > /dev/null 2>&1";
    const int status = std::system(failing.c_str());
    CHECK(WEXITSTATUS(status) == 3);
    const int seeded = run_cli("prepare-data --seed 11 --out " + (dir / "seeded").string());
    CHECK(seeded == 0);
    const json m = json::parse(read_text(dir / "seeded" / "manifest.json"));
    CHECK(m["config"]["seed"] == 11);
}

TEST_CASE("single-stage commands reproduce the pipeline") {
    const fs::path dir = scratch("standalone");
    const ExperimentConfig cfg = small_config();
    const fs::path piped = dir / "piped";
    harness::run_pipeline(cfg, piped);
    const harness::Paths p{piped};

    const fs::path cfg_file = dir / "cfg.json";
    std::ofstream(cfg_file) << cfg.to_json().dump();
    const std::string c = " --config " + cfg_file.string();
    const fs::path data = dir / "data", brain = dir / "ck" / "brain.ckpt", dec = dir / "ck" / "dec.ckpt",
                   run = dir / "run";
    REQUIRE(run_cli("prepare-data --spec " + cfg_file.string() + " --out " + data.string()) == 0);
    REQUIRE(run_cli("train-brain --data " + data.string() + c + " --out " + brain.string()) == 0);
    REQUIRE(run_cli("train-decoupler --data " + data.string() + " --brain " + brain.string() + c +
                    " --out " + dec.string()) == 0);
    REQUIRE(run_cli("infer --data " + data.string() + " --brain " + brain.string() + " --decoupler " +
                    dec.string() + " --backend stub" + c + " --out " + run.string()) == 0);
    REQUIRE(run_cli("eval --run " + run.string() + " --gt " + data.string() + c + " --out " +
                    (dir / "report").string()) == 0);

    CHECK(sha256_tree(data) == sha256_tree(p.data()));
    CHECK(sha256_file(brain) == sha256_file(p.brain_ckpt()));
    CHECK(sha256_file(dec) == sha256_file(p.decoupler_ckpt()));
    CHECK(read_text(dir / "ck" / "dec.csv") == read_text(p.train_log()));
    CHECK(sha256_tree(run) == sha256_tree(p.run()));
    CHECK(read_text(dir / "report.csv") == read_text(p.report().string() + ".csv"));

    const json meta = json::parse(read_text(run / "sample_0000" / "meta.json"));
    CHECK(meta["config_hash"] == cfg.hash());
    CHECK(meta["root_seed"] == cfg.seed);
    CHECK(meta["seed"] == derive_seed(cfg.seed, "infer.0"));

    CHECK(run_cli("train-decoupler --data " + data.string() + c + " --out " + dec.string()) == 2);
    CHECK(run_cli("infer --data " + data.string() + " --brain " + brain.string() + " --decoupler " +
                  dec.string() + " --backend bogus --out " + run.string()) == 2);
    CHECK(run_cli("prepare-data --spec " + cfg_file.string() + c + " --out " + data.string()) == 2);
    CHECK(run_cli("train-brain --data " + (dir / "nowhere").string() + c + " --out " + brain.string()) == 3);
}
