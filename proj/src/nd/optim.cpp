#include "eegdiff/nd/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace eegdiff::nd {

void AdamConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("adam: betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw std::invalid_argument("adam: epsilon must be positive");
}

Adam::Adam(const AdamConfig& cfg, const ParamStore& store, const std::vector<std::string>& names)
    : cfg_(cfg), names_(names) {
    cfg_.validate();
    for (const auto& name : names_) {
        if (!store.contains(name)) throw std::invalid_argument("adam: unknown parameter '" + name + "'");
        if (store.is_buffer(name)) throw std::invalid_argument("adam: '" + name + "' is a buffer");
        const Tensor& p = store.at(name);
        params_.push_back(p);
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step(const Gradients& grads) {
    ++steps_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Tensor& p = params_[k];
        const bool has_grad = grads.contains(p);
        const auto g = has_grad ? grads.view(p) : std::span<const double>{};
        auto values = p.mutable_data();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double gi = has_grad ? g[i] : 0.0;
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
            values[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
        }
    }
}

} // namespace eegdiff::nd
