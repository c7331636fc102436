#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "eegdiff/diffusion/training.hpp"
#include "eegdiff/eval/metrics.hpp"
#include "eegdiff/model/encoder.hpp"
#include "eegdiff/signal/dataset.hpp"
#include "eegdiff/train/config.hpp"

namespace eegdiff::train {

/// Non-finite loss, or an input that does not fit the configured model.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Autoencoder together with the store its parameters live in.
struct EncoderBundle {
    nd::ParamStore store;
    model::Autoencoder model;

    EncoderBundle(const model::EncoderConfig& cfg, nd::Rng& rng) : model(cfg, store, rng) {}
    EncoderBundle(const EncoderBundle&) = delete;
    EncoderBundle& operator=(const EncoderBundle&) = delete;
};

/// Denoiser and adapter sharing one store ("unet.*", "adapter.*").
struct DiffusionBundle {
    nd::ParamStore store;
    diffusion::Denoiser denoiser;
    diffusion::Adapter adapter;

    DiffusionBundle(const RunConfig& cfg, nd::Rng& rng)
        : denoiser(cfg.denoiser(), store, rng), adapter(store, cfg.width, rng) {}
    DiffusionBundle(const DiffusionBundle&) = delete;
    DiffusionBundle& operator=(const DiffusionBundle&) = delete;
};

struct EpochMetric {
    std::size_t epoch = 0;
    std::string metric;
    double value = 0.0;
};

/// CSV "epoch,metric,value".
void write_epoch_metrics(const std::filesystem::path& path, const std::vector<EpochMetric>& rows);

/// Throws TrainingError unless the dataset was generated with the configured dims.
void check_dataset(const RunConfig& cfg, const signal::Dataset& ds);

// Batches gathered from dataset items, in the given order.
nd::Tensor window_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items);   // (N, C, S)
nd::Tensor text_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items);     // (N, T, D)
nd::Tensor image_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items);    // (N, D)
nd::Tensor latent_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items);   // (N, C', H, W)
std::vector<std::size_t> item_labels(const signal::Dataset& ds, const std::vector<std::size_t>& items);

/// Consecutive slices of `items` of at most `size` entries.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& items, std::size_t size);

/// Items of a split by name ("train", "val" or "test").
const std::vector<std::size_t>& split_items(const signal::Dataset& ds, const std::string& split);

// ---------------------------------------------------------------- Stage 1

struct Stage1Evaluation {
    double loss = 0.0;
    double recon = 0.0;
    double align = 0.0;
    double contrastive = 0.0;
    double mse = 0.0;
    double dice = 0.0; // 1 - sdsc_loss
    double top1 = 0.0;
    double top5 = 0.0;
};

/// Evaluation-mode losses and label/global retrieval over `items`.
Stage1Evaluation evaluate_stage1(const EncoderBundle& encoder, const signal::Dataset& ds,
                                 const std::vector<std::size_t>& items, const RunConfig& cfg);

struct Stage1Result {
    std::vector<EpochMetric> metrics;
    Stage1Evaluation initial;
    Stage1Evaluation final;
};

/// Trains the autoencoder on the train split; evaluates on the validation
/// split after every epoch (epoch 0 is the untrained model). Writes
/// `<out>/encoder.ckpt` and `<out>/stage1_metrics.csv`.
Stage1Result train_stage1(const RunConfig& cfg, const signal::Dataset& ds, const std::filesystem::path& out);

/// Loads an encoder checkpoint, checking its recorded dims against the config.
std::unique_ptr<EncoderBundle> load_encoder(const RunConfig& cfg, const std::filesystem::path& path);

/// Evaluation-mode Z_latent for `items`, (N, T, D), without a graph.
nd::Tensor encode_items(const EncoderBundle& encoder, const signal::Dataset& ds, const std::vector<std::size_t>& items);

/// Label and image retrieval on `items` at K = 1 and 5, global and local.
/// Global searches the class image embeddings; local searches the paired
/// images of the query's batch. K beyond a pool is skipped.
std::vector<eval::MetricRow> retrieval_report(const EncoderBundle& encoder, const signal::Dataset& ds,
                                              const std::vector<std::size_t>& items, std::size_t batch_size);

// ---------------------------------------------------------------- Stage 2

struct Stage2Result {
    std::vector<EpochMetric> metrics;
    std::size_t steps = 0;
    std::vector<double> step_losses;       // Stage-2 finetuning only
    std::vector<std::string> mask;
    std::size_t frozen_changed = 0;        // non-mask diffusion tensors that moved
    std::size_t encoder_changed = 0;       // encoder tensors that moved
};

/// Base phase: every "unet.*" parameter on text conditions, a stand-in for a
/// pretrained text-to-image model. Finetuning phase: only the selective mask
/// on EEG conditions from the frozen encoder. Writes `<out>/diffusion.ckpt`
/// and `<out>/stage2_metrics.csv`.
Stage2Result train_stage2(const RunConfig& cfg, const signal::Dataset& ds, const EncoderBundle& encoder,
                          const std::filesystem::path& out);

std::unique_ptr<DiffusionBundle> load_diffusion(const RunConfig& cfg, const std::filesystem::path& path);

struct Generation {
    nd::Tensor samples;                // (num_samples, C', H, W)
    std::vector<std::size_t> labels;   // conditioning class per sample
    std::vector<std::size_t> sources;  // item whose EEG conditioned the sample
};

/// cfg.num_samples latents conditioned on the eval split, cycling through its
/// items; the initial noise depends only on cfg.seed.
Generation generate(const RunConfig& cfg, const signal::Dataset& ds, const EncoderBundle& encoder,
                    const DiffusionBundle& diffusion, double guidance);

struct GenerationScores {
    double class_agreement = 0.0;
    double frechet = 0.0; // against the Gaussian fit of every dataset latent
};

GenerationScores score_generation(const Generation& gen, const signal::Dataset& ds);

/// Seeded end-to-end checks of every differentiable stage at small dims.
struct GradCheckRow {
    std::string target;
    std::uint64_t seed = 0;
    double error = 0.0;
};
std::vector<GradCheckRow> gradient_suite(std::size_t seeds = 10);

} // namespace eegdiff::train
