#include "eegdiff/signal/filter.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eegdiff::signal {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

} // namespace

double bandpass_gain(double f, double lo, double hi, double transition) {
    if (f >= lo && f <= hi) return 1.0;
    if (transition <= 0.0) return 0.0;
    if (f < lo && f > lo - transition) return 0.5 * (1.0 + std::cos(std::numbers::pi * (lo - f) / transition));
    if (f > hi && f < hi + transition) return 0.5 * (1.0 + std::cos(std::numbers::pi * (f - hi) / transition));
    return 0.0;
}

std::vector<double> bandpass_filter(std::span<const double> signal, double fs, double lo, double hi,
                                    double transition) {
    if (!(fs > 0.0 && lo > 0.0 && lo < hi && hi < fs / 2.0)) {
        throw std::invalid_argument("bandpass_filter: need 0 < lo < hi < fs/2, got lo=" + std::to_string(lo) +
                                    " hi=" + std::to_string(hi) + " fs=" + std::to_string(fs));
    }
    if (transition < 0.0) throw std::invalid_argument("bandpass_filter: negative transition width");
    const std::size_t n = signal.size();
    if (n == 0) return {};

    const std::size_t bins = n / 2 + 1;
    std::unique_ptr<double, FftwFree> time(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> freq(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    Plan forward, inverse;
    {
        std::lock_guard lock(planner_mutex());
        const int len = static_cast<int>(n);
        forward.reset(fftw_plan_dft_r2c_1d(len, time.get(), freq.get(), FFTW_ESTIMATE));
        inverse.reset(fftw_plan_dft_c2r_1d(len, freq.get(), time.get(), FFTW_ESTIMATE));
    }
    std::copy(signal.begin(), signal.end(), time.get());
    fftw_execute(forward.get());
    const double df = fs / static_cast<double>(n);
    for (std::size_t k = 0; k < bins; ++k) {
        const double g = bandpass_gain(static_cast<double>(k) * df, lo, hi, transition);
        freq.get()[k][0] *= g;
        freq.get()[k][1] *= g;
    }
    fftw_execute(inverse.get());
    std::vector<double> out(time.get(), time.get() + n);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return out;
}

} // namespace eegdiff::signal
