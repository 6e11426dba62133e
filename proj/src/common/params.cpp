#include "neurons/common/params.hpp"

#include "neurons/common/error.hpp"

namespace neurons {

Mat& ParamSet::add(const std::string& name, Mat init) {
    grads_[name] = Mat::Zero(init.rows(), init.cols());
    return values_[name] = std::move(init);
}

Mat& ParamSet::operator[](const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw StateError("unknown parameter " + name);
    return it->second;
}

const Mat& ParamSet::operator[](const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw StateError("unknown parameter " + name);
    return it->second;
}

Mat& ParamSet::grad(const std::string& name) {
    auto it = grads_.find(name);
    if (it == grads_.end()) throw StateError("unknown parameter " + name);
    return it->second;
}

const Mat& ParamSet::grad(const std::string& name) const {
    auto it = grads_.find(name);
    if (it == grads_.end()) throw StateError("unknown parameter " + name);
    return it->second;
}

void ParamSet::zero_grad() {
    for (auto& [name, g] : grads_) g.setZero();
}

std::size_t ParamSet::count() const {
    std::size_t n = 0;
    for (const auto& [name, v] : values_) n += static_cast<std::size_t>(v.size());
    return n;
}

void AdamW::set_lr_multiplier(const std::string& prefix, double mult) {
    multipliers_[prefix] = mult;
}

double AdamW::lr_multiplier(const std::string& name) const {
    // longest matching prefix wins
    double mult = 1.0;
    std::size_t best = 0;
    for (const auto& [prefix, m] : multipliers_) {
        if (name.compare(0, prefix.size(), prefix) == 0 && prefix.size() >= best) {
            best = prefix.size();
            mult = m;
        }
    }
    return mult;
}

void AdamW::step(ParamSet& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [name, value] : params.values()) {
        const double mult = lr_multiplier(name);
        if (mult == 0.0) continue;
        const Mat& g = params.grad(name);
        auto [mit, m_new] = m_.try_emplace(name, Mat::Zero(value.rows(), value.cols()));
        auto [vit, v_new] = v_.try_emplace(name, Mat::Zero(value.rows(), value.cols()));
        Mat& m = mit->second;
        Mat& v = vit->second;
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        const double lr = cfg_.lr * mult;
        value *= (1.0 - lr * cfg_.weight_decay);
        value.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.eps);
    }
}

std::map<std::string, Mat> AdamW::export_state() const {
    std::map<std::string, Mat> out;
    for (const auto& [name, m] : m_) out["m." + name] = m;
    for (const auto& [name, v] : v_) out["v." + name] = v;
    return out;
}

void AdamW::import_state(const std::map<std::string, Mat>& state, long steps) {
    m_.clear();
    v_.clear();
    for (const auto& [key, value] : state) {
        if (key.rfind("m.", 0) == 0) m_[key.substr(2)] = value;
        else if (key.rfind("v.", 0) == 0) v_[key.substr(2)] = value;
    }
    t_ = steps;
}

}  // namespace neurons
