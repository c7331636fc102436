#include "eegdiff/signal/preprocess.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "eegdiff/signal/filter.hpp"

namespace eegdiff::signal {

std::size_t discard_count(const PreprocessConfig& cfg) {
    return static_cast<std::size_t>(std::llround(cfg.discard_seconds * cfg.fs));
}

EegWindow preprocess(const std::vector<double>& raw, std::size_t channels, const PreprocessConfig& cfg) {
    if (channels == 0 || raw.size() % channels != 0) {
        throw std::invalid_argument("preprocess: " + std::to_string(raw.size()) +
                                    " values do not split into " + std::to_string(channels) + " channels");
    }
    const std::size_t raw_len = raw.size() / channels;
    const std::size_t skip = discard_count(cfg);
    if (raw_len < skip + cfg.target_length) {
        throw std::invalid_argument("preprocess: raw window of " + std::to_string(raw_len) +
                                    " samples is shorter than discard " + std::to_string(skip) + " + target " +
                                    std::to_string(cfg.target_length));
    }
    EegWindow w;
    w.channels = channels;
    w.samples = cfg.target_length;
    w.values.resize(channels * cfg.target_length);
    for (std::size_t c = 0; c < channels; ++c) {
        const std::span<const double> row(raw.data() + c * raw_len, raw_len);
        const std::vector<double> filtered = bandpass_filter(row, cfg.fs, cfg.lo, cfg.hi);
        std::copy_n(filtered.begin() + static_cast<std::ptrdiff_t>(skip), cfg.target_length,
                    w.values.begin() + static_cast<std::ptrdiff_t>(c * cfg.target_length));
    }
    return w;
}

} // namespace eegdiff::signal
