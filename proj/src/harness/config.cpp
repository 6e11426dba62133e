#include "neurons/harness/config.hpp"

#include <fstream>
#include <set>

#include "neurons/common/error.hpp"
#include "neurons/common/hashing.hpp"

namespace neurons {

using nlohmann::json;

namespace {

// Reads one JSON object section, rejecting keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown config key: " + path_ + key);
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("bad value for " + path_ + key + ": " + e.what());
        }
    }

    const json* sub(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string child(const char* key) const { return path_ + key + "."; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError("invalid " + field + ": " + why);
}

}  // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["priority_multiplier"] = priority_multiplier;
    j["dataset"] = {{"num_clips", dataset.num_clips}, {"height", dataset.height},
                    {"width", dataset.width},         {"frames", dataset.frames},
                    {"voxels", dataset.voxels},       {"max_objects", dataset.max_objects},
                    {"subject_id", dataset.subject_id}, {"noise", dataset.noise}};
    j["model"] = {{"hidden", model.hidden},
                  {"tokens", model.tokens},
                  {"width", model.width},
                  {"text_tokens", model.text_tokens},
                  {"attn_width", model.attn_width},
                  {"trunk_channels", model.trunk_channels},
                  {"latent_channels", model.latent_channels},
                  {"vocab", model.vocab},
                  {"text_hidden", model.text_hidden},
                  {"max_decode", model.max_decode}};
    j["brain"] = {{"epochs", brain.epochs},         {"batch_size", brain.batch_size},
                  {"lr", brain.lr},                 {"weight_decay", brain.weight_decay},
                  {"ridge_l2", brain.ridge_l2},     {"tau", brain.tau},
                  {"beta_alpha", brain.beta_alpha}, {"mixco_fraction", brain.mixco_fraction}};
    j["decoupler"] = {{"epochs", decoupler.epochs},
                      {"batch_size", decoupler.batch_size},
                      {"lr", decoupler.lr},
                      {"period_epochs", decoupler.period_epochs},
                      {"period_starts", decoupler.period_starts},
                      {"prior_lr_mult", decoupler.prior_lr_mult},
                      {"seed", decoupler.seed},
                      {"disabled_losses", decoupler.disabled_losses}};
    j["inference"] = {{"mask_threshold", inference.mask_threshold},
                      {"source_fps", inference.source_fps},
                      {"target_fps", inference.target_fps},
                      {"backend", inference.backend}};
    j["eval"] = {{"repeats", eval.repeats},
                 {"num_labels", eval.num_labels},
                 {"verb_threshold", eval.verb_threshold}};
    return j;
}

std::string ExperimentConfig::hash() const { return sha256_hex(to_json().dump()); }

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    Section root(j, "");
    root.get("seed", cfg.seed);
    root.get("priority_multiplier", cfg.priority_multiplier);
    if (const json* s = root.sub("dataset")) {
        Section d(*s, root.child("dataset"));
        d.get("num_clips", cfg.dataset.num_clips);
        d.get("height", cfg.dataset.height);
        d.get("width", cfg.dataset.width);
        d.get("frames", cfg.dataset.frames);
        d.get("voxels", cfg.dataset.voxels);
        d.get("max_objects", cfg.dataset.max_objects);
        d.get("subject_id", cfg.dataset.subject_id);
        d.get("noise", cfg.dataset.noise);
        d.finish();
    }
    if (const json* s = root.sub("model")) {
        Section m(*s, root.child("model"));
        m.get("hidden", cfg.model.hidden);
        m.get("tokens", cfg.model.tokens);
        m.get("width", cfg.model.width);
        m.get("text_tokens", cfg.model.text_tokens);
        m.get("attn_width", cfg.model.attn_width);
        m.get("trunk_channels", cfg.model.trunk_channels);
        m.get("latent_channels", cfg.model.latent_channels);
        m.get("vocab", cfg.model.vocab);
        m.get("text_hidden", cfg.model.text_hidden);
        m.get("max_decode", cfg.model.max_decode);
        m.finish();
    }
    if (const json* s = root.sub("brain")) {
        Section b(*s, root.child("brain"));
        b.get("epochs", cfg.brain.epochs);
        b.get("batch_size", cfg.brain.batch_size);
        b.get("lr", cfg.brain.lr);
        b.get("weight_decay", cfg.brain.weight_decay);
        b.get("ridge_l2", cfg.brain.ridge_l2);
        b.get("tau", cfg.brain.tau);
        b.get("beta_alpha", cfg.brain.beta_alpha);
        b.get("mixco_fraction", cfg.brain.mixco_fraction);
        b.finish();
    }
    if (const json* s = root.sub("decoupler")) {
        Section d(*s, root.child("decoupler"));
        d.get("epochs", cfg.decoupler.epochs);
        d.get("batch_size", cfg.decoupler.batch_size);
        d.get("lr", cfg.decoupler.lr);
        d.get("period_epochs", cfg.decoupler.period_epochs);
        d.get("period_starts", cfg.decoupler.period_starts);
        d.get("prior_lr_mult", cfg.decoupler.prior_lr_mult);
        d.get("seed", cfg.decoupler.seed);
        d.get("disabled_losses", cfg.decoupler.disabled_losses);
        d.finish();
    }
    if (const json* s = root.sub("inference")) {
        Section i(*s, root.child("inference"));
        i.get("mask_threshold", cfg.inference.mask_threshold);
        i.get("source_fps", cfg.inference.source_fps);
        i.get("target_fps", cfg.inference.target_fps);
        i.get("backend", cfg.inference.backend);
        i.finish();
    }
    if (const json* s = root.sub("eval")) {
        Section e(*s, root.child("eval"));
        e.get("repeats", cfg.eval.repeats);
        e.get("num_labels", cfg.eval.num_labels);
        e.get("verb_threshold", cfg.eval.verb_threshold);
        e.finish();
    }
    root.finish();
    validate(cfg);
    return cfg;
}

void validate(const ExperimentConfig& c) {
    require(c.dataset.frames == 6, "dataset.frames", "clips have exactly 6 frames");
    require(c.dataset.num_clips >= 1, "dataset.num_clips", "must be >= 1");
    require(c.dataset.height > 0 && c.dataset.height % 8 == 0, "dataset.height",
            "must be a positive multiple of 8");
    require(c.dataset.width > 0 && c.dataset.width % 8 == 0, "dataset.width",
            "must be a positive multiple of 8");
    require(c.dataset.voxels > 0, "dataset.voxels", "must be positive");
    require(c.dataset.max_objects >= 1, "dataset.max_objects", "must be >= 1");
    require(c.dataset.noise >= 0, "dataset.noise", "must be non-negative");
    require(c.priority_multiplier >= 1.0, "priority_multiplier", "must be >= 1");

    const auto& m = c.model;
    for (auto [v, name] : {std::pair{m.hidden, "model.hidden"}, {m.tokens, "model.tokens"},
                          {m.width, "model.width"}, {m.text_tokens, "model.text_tokens"},
                          {m.attn_width, "model.attn_width"},
                          {m.trunk_channels, "model.trunk_channels"},
                          {m.latent_channels, "model.latent_channels"},
                          {m.vocab, "model.vocab"}, {m.text_hidden, "model.text_hidden"},
                          {m.max_decode, "model.max_decode"}}) {
        require(v > 0, name, "must be positive");
    }

    require(c.brain.epochs >= 1, "brain.epochs", "must be >= 1");
    require(c.brain.batch_size >= 1, "brain.batch_size", "must be >= 1");
    require(c.brain.lr > 0, "brain.lr", "must be positive");
    require(c.brain.tau > 0, "brain.tau", "must be positive");
    require(c.brain.beta_alpha > 0, "brain.beta_alpha", "must be positive");
    require(c.brain.mixco_fraction >= 0 && c.brain.mixco_fraction <= 1,
            "brain.mixco_fraction", "must lie in [0,1]");
    require(c.brain.ridge_l2 >= 0, "brain.ridge_l2", "must be non-negative");

    require(c.decoupler.epochs >= 1, "decoupler.epochs", "must be >= 1");
    require(c.decoupler.batch_size >= 1, "decoupler.batch_size", "must be >= 1");
    require(c.decoupler.lr > 0, "decoupler.lr", "must be positive");
    require(c.decoupler.period_epochs >= 1, "decoupler.period_epochs", "must be >= 1");
    for (int s : c.decoupler.period_starts) {
        require(s >= 0, "decoupler.period_starts", "must be non-negative");
    }
    require(c.decoupler.prior_lr_mult >= 0, "decoupler.prior_lr_mult", "must be >= 0");
    for (const auto& name : c.decoupler.disabled_losses) {
        require(name == "seg" || name == "cls" || name == "txt" || name == "rec",
                "decoupler.disabled_losses", "unknown loss '" + name + "'");
    }

    require(c.inference.mask_threshold > 0 && c.inference.mask_threshold < 1,
            "inference.mask_threshold", "must lie in (0,1)");
    require(c.inference.source_fps > 0 && c.inference.target_fps > 0, "inference.fps",
            "must be positive");
    require(c.inference.backend == "stub" || c.inference.backend == "external",
            "inference.backend", "must be 'stub' or 'external'");

    require(c.eval.repeats >= 1, "eval.repeats", "must be >= 1");
    require(c.eval.num_labels >= 50, "eval.num_labels", "50-way needs >= 50 labels");
    require(c.eval.verb_threshold > 0 && c.eval.verb_threshold < 1, "eval.verb_threshold",
            "must lie in (0,1)");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace neurons
