#pragma once

#include <cstddef>
#include <vector>

namespace eegdiff::diffusion {

inline constexpr double kSnrFloor = 1e-8;
inline constexpr double kSnrCeiling = 1e8;

/// Variance-preserving table indexed by t in [0, steps): x_t = alpha[t] x0 + sigma[t] eps.
struct NoiseSchedule {
    std::vector<double> alpha;
    std::vector<double> sigma;

    std::size_t steps() const { return alpha.size(); }
    /// alpha^2 / sigma^2 clamped to [kSnrFloor, kSnrCeiling]; throws std::out_of_range for bad t.
    double snr(std::size_t t) const;
    /// SNR(t)^-gamma.
    double weight(std::size_t t, double gamma) const;
    void check_step(std::size_t t) const;
};

/// Linear beta ramp; alpha_t = sqrt(prod_{i<=t}(1 - beta_i)), sigma_t = sqrt(1 - alpha_t^2).
/// Throws std::invalid_argument unless steps >= 2 and 0 < beta_min <= beta_max < 1.
NoiseSchedule build_schedule(std::size_t steps = 1000, double beta_min = 1e-4, double beta_max = 0.02);

} // namespace eegdiff::diffusion
