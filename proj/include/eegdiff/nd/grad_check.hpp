#pragma once

#include <functional>

#include "eegdiff/nd/tensor.hpp"

namespace eegdiff::nd {

using ScalarFn = std::function<Tensor(const Tensor&)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

/// Compares the reverse-mode gradient of `fn` at `point` against central
/// differences. `point` must be a leaf; its values are perturbed in place and
/// restored before returning. The relative error per component is
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
GradCheckResult grad_check_detailed(const ScalarFn& fn, Tensor point, double epsilon = 1e-5);

double grad_check(const ScalarFn& fn, Tensor point, double epsilon = 1e-5);

} // namespace eegdiff::nd
