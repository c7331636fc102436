#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegdiff/signal/preprocess.hpp"

namespace eegdiff::signal {

struct DatasetDims {
    std::size_t channels = 16;     // C
    std::size_t samples = 64;      // S, after preprocessing
    std::size_t tokens = 8;        // T
    std::size_t width = 32;        // D
    std::size_t classes = 8;       // K
    std::size_t subjects = 3;      // M
    std::size_t latent_channels = 4;
    std::size_t latent_height = 8;
    std::size_t latent_width = 8;

    std::size_t latent_size() const { return latent_channels * latent_height * latent_width; }
};

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct SyntheticConfig {
    DatasetDims dims;
    std::size_t per_class = 20;
    std::uint64_t seed = 7;
    SplitRatios ratios;
    double fs = 1000.0;
    double band_lo = 5.0;
    double band_hi = 95.0;
    std::size_t components_per_class = 3;
    double amplitude = 1.5;
    double noise = 0.25;
    double anchor_ceiling = 0.3;
    double text_spread = 0.5;
    double latent_jitter = 0.25;
};

/// Stand-ins for the frozen text and image embeddings of one class.
struct SemanticAnchor {
    std::size_t label = 0;
    std::vector<double> text;  // T x D, row-major
    std::vector<double> image; // D, unit norm
};

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct Dataset {
    DatasetDims dims;
    std::uint64_t seed = 0;
    std::size_t per_class = 0;
    SplitRatios ratios;
    double fs = 1000.0;
    std::vector<EegWindow> windows;           // item id == index
    std::vector<SemanticAnchor> anchors;      // one per class, index == label
    std::vector<std::vector<double>> anchor_latents; // K x latent_size
    std::vector<std::vector<double>> latents;        // per item target latent
    Splits splits;
};

/// Class-specific sinusoid mixtures with per-subject gain and phase, plus white
/// noise, preprocessed to dims.samples. Deterministic in the config.
/// Throws std::invalid_argument when K < 2, per_class < 2, any dim < 2 or
/// K > 4 * C.
Dataset gen_synthetic_dataset(const SyntheticConfig& cfg);

/// Stratified split: each class's items are shuffled, then cut by the ratios.
Splits stratified_split(const std::vector<std::size_t>& labels, std::size_t classes, const SplitRatios& ratios,
                        std::uint64_t seed);

/// Writes `<dir>/manifest.json` and `<dir>/dataset.bin`.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
/// Reads a dataset and checks the binary payload against the manifest.
Dataset load_dataset(const std::filesystem::path& dir);

} // namespace eegdiff::signal
