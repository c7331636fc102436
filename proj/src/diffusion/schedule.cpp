#include "eegdiff/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eegdiff::diffusion {

void NoiseSchedule::check_step(std::size_t t) const {
    if (t >= steps()) {
        throw std::out_of_range("timestep " + std::to_string(t) + " outside schedule of " +
                                std::to_string(steps()) + " steps");
    }
}

double NoiseSchedule::snr(std::size_t t) const {
    check_step(t);
    const double s2 = sigma[t] * sigma[t];
    if (s2 == 0.0) return kSnrCeiling;
    return std::clamp(alpha[t] * alpha[t] / s2, kSnrFloor, kSnrCeiling);
}

double NoiseSchedule::weight(std::size_t t, double gamma) const {
    if (gamma < 0.0) throw std::invalid_argument("SNR weighting exponent must be non-negative");
    return std::pow(snr(t), -gamma);
}

NoiseSchedule build_schedule(std::size_t steps, double beta_min, double beta_max) {
    if (steps < 2) throw std::invalid_argument("build_schedule: need at least 2 steps");
    if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
        throw std::invalid_argument("build_schedule: need 0 < beta_min <= beta_max < 1");
    }
    NoiseSchedule s;
    double keep = 1.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double beta = beta_min + (beta_max - beta_min) * static_cast<double>(i) / static_cast<double>(steps - 1);
        keep *= 1.0 - beta;
        const double a = std::sqrt(keep);
        s.alpha.push_back(a);
        s.sigma.push_back(std::sqrt(1.0 - keep));
    }
    return s;
}

} // namespace eegdiff::diffusion
