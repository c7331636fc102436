#pragma once

#include <span>
#include <vector>

namespace eegdiff::signal {

/// Zero-phase band-pass by FFT masking. Bins inside [lo, hi] pass unchanged;
/// a raised-cosine skirt of width `transition` Hz on each side falls to zero.
/// The mask is real and symmetric, so the filter is linear and adds no phase.
/// Throws std::invalid_argument unless 0 < lo < hi < fs / 2.
std::vector<double> bandpass_filter(std::span<const double> signal, double fs, double lo, double hi,
                                    double transition = 2.0);

/// Gain applied at frequency `f` by bandpass_filter.
double bandpass_gain(double f, double lo, double hi, double transition);

} // namespace eegdiff::signal
