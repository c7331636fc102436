#pragma once

#include <cstddef>
#include <vector>

namespace eegdiff::signal {

/// One EEG trial, row-major C x S.
struct EegWindow {
    std::size_t channels = 0;
    std::size_t samples = 0;
    std::vector<double> values;
    std::size_t label = 0;
    std::size_t subject = 0;

    double at(std::size_t c, std::size_t s) const { return values[c * samples + s]; }
};

struct PreprocessConfig {
    double fs = 1000.0;
    double lo = 5.0;
    double hi = 95.0;
    double discard_seconds = 0.020;
    std::size_t target_length = 440;
};

/// Number of leading samples preprocess drops: round(discard_seconds * fs).
std::size_t discard_count(const PreprocessConfig& cfg);

/// Band-passes each channel of `raw` (row-major, `channels` rows), drops the
/// leading discard, then keeps exactly `target_length` samples.
/// Throws std::invalid_argument when a row is shorter than discard + target.
EegWindow preprocess(const std::vector<double>& raw, std::size_t channels, const PreprocessConfig& cfg);

} // namespace eegdiff::signal
