#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "eegdiff/diffusion/adapter.hpp"
#include "eegdiff/diffusion/denoiser.hpp"
#include "eegdiff/diffusion/schedule.hpp"
#include "eegdiff/nd/optim.hpp"

namespace eegdiff::diffusion {

/// Names of the parameters an optimizer may write; everything else is frozen.
class TrainMask {
public:
    TrainMask() = default;
    /// Throws std::invalid_argument when a name is not a parameter of `store`.
    TrainMask(std::set<std::string> names, const nd::ParamStore& store);

    /// adapter.* plus every cross-attention key/value projection.
    static TrainMask selective(const nd::ParamStore& store);
    /// Every parameter whose name starts with `prefix`.
    static TrainMask with_prefix(const nd::ParamStore& store, const std::string& prefix);

    bool contains(const std::string& name) const { return names_.count(name) != 0; }
    std::vector<std::string> names() const { return {names_.begin(), names_.end()}; }
    std::size_t size() const { return names_.size(); }

    /// Marks mask members as requiring grad and every other parameter as not.
    void apply(nd::ParamStore& store) const;

    /// JSON array of the trainable names, for checkpoint headers.
    std::string to_json() const;

private:
    std::set<std::string> names_;
};

bool is_selective_name(const std::string& name);

/// One optimization batch: target latents (N, C, H, W) and their condition
/// source, either EEG latents (N, T, D) for Stage 2 or text anchors for the
/// base model.
struct DiffusionBatch {
    nd::Tensor x0;
    nd::Tensor z_latent;
};

/// Per-item randomness of a training step.
struct StepNoise {
    std::vector<std::size_t> t;
    nd::Tensor eps;
    std::vector<bool> dropped; // true: condition replaced by the null tokens
};

StepNoise draw_step_noise(const nd::Tensor& x0, const NoiseSchedule& schedule, double drop_prob, nd::Rng& rng);

/// Condition rows replaced by the null tokens where `dropped` is set.
nd::Tensor drop_conditions(const nd::Tensor& condition, const std::vector<bool>& dropped, const Denoiser& model);

/// Stage-2 condition concat(Z_latent, adapt(mean_T Z_latent)).
nd::Tensor eeg_condition(const nd::Tensor& z_latent, const Adapter& adapter);
/// Base-model condition concat(Z_text, zeros(4, D)).
nd::Tensor text_condition(const nd::Tensor& z_text);

/// v_loss on the given condition after per-item dropout.
nd::Tensor conditioned_v_loss(const nd::Tensor& x0, const nd::Tensor& condition, const StepNoise& noise,
                              const Denoiser& model, const NoiseSchedule& schedule, double gamma);

/// One Stage-2 update: draws t, eps and the dropout pattern, computes v_loss on
/// the EEG condition and steps `optimizer`, whose parameter list must equal the
/// mask. Returns the loss value.
double stage2_train_step(const DiffusionBatch& batch, const Denoiser& model, const Adapter& adapter,
                         const TrainMask& mask, double drop_prob, nd::Adam& optimizer, const NoiseSchedule& schedule,
                         nd::Rng& rng, double gamma = 0.5);

/// One update of the base model on text conditions (stand-in for pretraining).
double base_train_step(const DiffusionBatch& batch, const Denoiser& model, double drop_prob, nd::Adam& optimizer,
                       const NoiseSchedule& schedule, nd::Rng& rng, double gamma = 0.5);

/// `steps` descending timesteps evenly spaced over the schedule, ending at 0.
std::vector<std::size_t> sampling_timesteps(const NoiseSchedule& schedule, std::size_t steps);

/// Deterministic DDIM (eta = 0) in the v-parameterization with classifier-free
/// guidance. Starts from N(0, I) drawn from `seed`; returns x0 estimates.
nd::Tensor sample_with_condition(const Denoiser& model, const nd::Tensor& condition, const NoiseSchedule& schedule,
                                 double guidance, std::size_t steps, std::uint64_t seed);

nd::Tensor sample(const Denoiser& model, const Adapter& adapter, const nd::Tensor& z_latent,
                  const NoiseSchedule& schedule, double guidance, std::size_t steps, std::uint64_t seed);

} // namespace eegdiff::diffusion
