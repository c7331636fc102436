#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "eegdiff/nd/tensor.hpp"

namespace eegdiff::nd {

/// Seeded generator with distribution code of our own, so streams are
/// byte-reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

    std::vector<double> normal_vector(std::size_t n, double scale = 1.0);
    Tensor normal_tensor(const Shape& shape, double scale = 1.0, bool requires_grad = false);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    /// Child generator for an independent stream.
    Rng split();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace eegdiff::nd
