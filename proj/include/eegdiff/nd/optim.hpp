#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eegdiff/nd/graph.hpp"
#include "eegdiff/nd/params.hpp"

namespace eegdiff::nd {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

/// Bias-corrected Adam over a fixed list of named parameters. Only the listed
/// tensors are ever written; a parameter absent from the gradients counts as a
/// zero gradient.
class Adam {
public:
    Adam(const AdamConfig& cfg, const ParamStore& store, const std::vector<std::string>& names);

    void step(const Gradients& grads);

    std::size_t steps() const { return steps_; }
    const std::vector<std::string>& names() const { return names_; }

private:
    AdamConfig cfg_;
    std::vector<std::string> names_;
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::size_t steps_ = 0;
};

} // namespace eegdiff::nd
