#pragma once

#include <map>
#include <string>

#include "neurons/common/nn.hpp"

namespace neurons {

/// Named parameter tensors plus matching gradient accumulators.
class ParamSet {
public:
    Mat& add(const std::string& name, Mat init);
    bool contains(const std::string& name) const { return values_.count(name) > 0; }

    Mat& operator[](const std::string& name);
    const Mat& operator[](const std::string& name) const;
    Mat& grad(const std::string& name);
    const Mat& grad(const std::string& name) const;

    void zero_grad();
    std::size_t count() const;

    const std::map<std::string, Mat>& values() const { return values_; }
    std::map<std::string, Mat>& values() { return values_; }

private:
    std::map<std::string, Mat> values_;
    std::map<std::string, Mat> grads_;
};

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

/// Decoupled-weight-decay Adam. Parameters can be given per-name learning
/// rate multipliers; a multiplier of 0 freezes the parameter entirely.
class AdamW {
public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    void set_lr_multiplier(const std::string& prefix, double mult);
    double lr_multiplier(const std::string& name) const;
    void step(ParamSet& params);

    const AdamWConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }
    long steps() const { return t_; }

    // Moment tensors keyed "m.<name>" / "v.<name>" for checkpointing.
    std::map<std::string, Mat> export_state() const;
    void import_state(const std::map<std::string, Mat>& state, long steps);

private:
    AdamWConfig cfg_;
    long t_ = 0;
    std::map<std::string, double> multipliers_;
    std::map<std::string, Mat> m_;
    std::map<std::string, Mat> v_;
};

}  // namespace neurons
