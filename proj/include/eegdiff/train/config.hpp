#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegdiff/diffusion/adapter.hpp"
#include "eegdiff/diffusion/denoiser.hpp"
#include "eegdiff/loss/losses.hpp"
#include "eegdiff/model/encoder.hpp"
#include "eegdiff/nd/optim.hpp"
#include "eegdiff/signal/dataset.hpp"

namespace eegdiff::train {

/// Rejected configuration; the CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything one run needs. Serialized as a flat JSON object; absent keys
/// keep their defaults and unknown keys are rejected.
struct RunConfig {
    // data
    std::size_t classes = 8;
    std::size_t per_class = 20;
    std::size_t subjects = 3;
    double fs = 1000.0;
    // encoder
    std::size_t channels = 16;
    std::size_t samples = 64;
    std::size_t tokens = 8;
    std::size_t width = 32;
    std::size_t temporal_width = 128;
    std::size_t heads = 8;
    std::size_t depth = 2;
    // toy latent grid and denoiser
    std::size_t latent_channels = 4;
    std::size_t latent_height = 8;
    std::size_t latent_width = 8;
    std::size_t unet_level1 = 32;
    std::size_t unet_level2 = 64;
    std::size_t attention_width = 32;
    std::size_t unet_heads = 4;
    std::size_t time_features = 32;
    // losses
    loss::LossWeights weights;
    // schedule
    std::size_t diffusion_steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;
    double gamma = 0.5;      // Stage-2 SNR weighting exponent
    double gamma_base = 0.0; // base phase: unweighted v-prediction
    // optimizers
    double lr_stage1 = 1e-3;
    double lr_base = 1e-3;
    double lr_stage2 = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    // budgets
    std::size_t epochs_stage1 = 200;
    std::size_t epochs_base = 1000;
    std::size_t epochs_stage2 = 300;
    std::size_t max_steps_stage2 = 0; // 0: no cap
    std::size_t batch_size = 16;
    std::uint64_t seed = 7;
    // generation
    double drop_prob = 0.1;
    double drop_prob_base = 0.3;
    double guidance = 7.5;
    std::size_t sample_steps = 50;
    std::size_t num_samples = 64;
    std::vector<double> sweep_scales{3.0, 5.0, 7.0, 9.0};
    std::string eval_split = "test";
    // inputs, relative to the working directory
    std::string data_dir = "data";
    std::string encoder_checkpoint = "stage1/encoder.ckpt";
    std::string diffusion_checkpoint = "stage2/diffusion.ckpt";

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    model::EncoderConfig encoder() const;
    diffusion::DenoiserConfig denoiser() const;
    signal::SyntheticConfig synthetic() const;
    nd::AdamConfig adam(double lr) const;

    nlohmann::json to_json() const;
    /// Throws ConfigError on unknown keys or wrongly typed values.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
};

} // namespace eegdiff::train
