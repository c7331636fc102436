#include "eegdiff/nd/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eegdiff/nd/graph.hpp"

namespace eegdiff::nd {

namespace {

double evaluate(const ScalarFn& fn, const Tensor& point) {
    const Tensor out = fn(point);
    if (out.size() != 1) throw ShapeError("grad_check: function must return a scalar, got " + shape_str(out.shape()));
    const double v = out.item();
    if (!std::isfinite(v)) throw DomainError("grad_check: function is non-finite at a perturbed point");
    return v;
}

} // namespace

GradCheckResult grad_check_detailed(const ScalarFn& fn, Tensor point, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1e-2)) throw std::invalid_argument("grad_check: epsilon must lie in (0, 1e-2]");
    if (!point.is_leaf()) throw std::invalid_argument("grad_check: point must be a leaf tensor");

    const bool had_grad = point.requires_grad();
    point.set_requires_grad(true);
    const Tensor out = fn(point);
    if (out.size() != 1) throw ShapeError("grad_check: function must return a scalar, got " + shape_str(out.shape()));
    const Gradients grads = backward(out);
    const std::vector<double> analytic = grads.of(point).to_vector();

    GradCheckResult result;
    auto values = point.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + epsilon;
        double plus = 0.0;
        double minus = 0.0;
        try {
            plus = evaluate(fn, point);
            values[i] = saved - epsilon;
            minus = evaluate(fn, point);
        } catch (...) {
            values[i] = saved;
            point.set_requires_grad(had_grad);
            throw;
        }
        values[i] = saved;
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double err = std::fabs(analytic[i] - numeric) /
                           std::max(1e-8, std::fabs(analytic[i]) + std::fabs(numeric));
        if (i == 0 || err > result.max_relative_error) {
            result.max_relative_error = err;
            result.worst_index = i;
            result.analytic = analytic[i];
            result.numeric = numeric;
        }
    }
    point.set_requires_grad(had_grad);
    return result;
}

double grad_check(const ScalarFn& fn, Tensor point, double epsilon) {
    return grad_check_detailed(fn, std::move(point), epsilon).max_relative_error;
}

} // namespace eegdiff::nd
