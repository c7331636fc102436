#include "eegdiff/nd/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace eegdiff::nd {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> Rng::normal_vector(std::size_t n, double scale) {
    std::vector<double> out(n);
    for (auto& v : out) v = scale * normal();
    return out;
}

Tensor Rng::normal_tensor(const Shape& shape, double scale, bool requires_grad) {
    return Tensor::from(shape, normal_vector(numel(shape), scale), requires_grad);
}

Rng Rng::split() {
    return Rng(engine_() ^ 0x9e3779b97f4a7c15ULL);
}

} // namespace eegdiff::nd
