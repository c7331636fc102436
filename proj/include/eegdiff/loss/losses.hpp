#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "eegdiff/diffusion/schedule.hpp"
#include "eegdiff/nd/ops.hpp"

namespace eegdiff::loss {

using nd::Tensor;

struct LossWeights {
    double sdsc = 0.2;
    double mse = 1.0;
    double cos = 1.0;
    double recon = 1.0;
    double align = 1.0;
    double con = 0.5;
    double tau = 0.07;

    /// Throws std::invalid_argument for a negative weight or tau <= 0.
    void validate() const;
};

/// Denominators below this make sdsc_loss return 0.
inline constexpr double kSdscNullThreshold = 1e-8;

/// 1 - 2 sum sigmoid(E*Ê) min(|E|,|Ê|) / sum(|E|+|Ê|), over every element.
Tensor sdsc_loss(const Tensor& e, const Tensor& e_hat);

/// Mean of squared differences over every element.
Tensor mse_loss(const Tensor& a, const Tensor& b);

/// mse + w.sdsc * sdsc_loss.
Tensor recon_loss(const Tensor& e, const Tensor& e_hat, const LossWeights& w);

/// w.mse * mse + w.cos * (1 - mean row cosine). Rows run over the last axis.
Tensor text_align_loss(const Tensor& z_latent, const Tensor& z_text, const LossWeights& w);

/// InfoNCE over cosine similarities of (N, D) rows; positives on the diagonal.
Tensor contrastive_loss(const Tensor& pooled, const Tensor& image, double tau);

/// w.recon * recon + w.align * text_align + w.con * contrastive.
Tensor stage1_loss(const Tensor& e, const Tensor& e_hat, const Tensor& z_latent, const Tensor& z_text,
                   const Tensor& pooled, const Tensor& image, const LossWeights& w);

/// Scales item n of a batch (leading axis) by coeffs[n].
Tensor scale_items(const Tensor& x, const std::vector<double>& coeffs);

/// x_t = alpha_t x0 + sigma_t eps, one timestep per item of the batch.
Tensor diffuse(const Tensor& x0, const Tensor& eps, const std::vector<std::size_t>& t,
               const diffusion::NoiseSchedule& schedule);

/// v = alpha_t eps - sigma_t x0, one timestep per item.
Tensor v_target(const Tensor& x0, const Tensor& eps, const std::vector<std::size_t>& t,
                const diffusion::NoiseSchedule& schedule);

/// x0 = alpha_t x_t - sigma_t v.
Tensor x0_from_v(const Tensor& x_t, const Tensor& v, const std::vector<std::size_t>& t,
                 const diffusion::NoiseSchedule& schedule);
/// eps = sigma_t x_t + alpha_t v.
Tensor eps_from_v(const Tensor& x_t, const Tensor& v, const std::vector<std::size_t>& t,
                  const diffusion::NoiseSchedule& schedule);

/// v prediction for a batch of noisy latents.
using VModel = std::function<Tensor(const Tensor& x_t, const std::vector<std::size_t>& t)>;

/// mean_n w(t_n) * mean ||v_target_n - model(x_t, t)_n||^2 with w = SNR^-gamma.
Tensor v_loss(const Tensor& x0, const Tensor& eps, const std::vector<std::size_t>& t, const VModel& model,
              const diffusion::NoiseSchedule& schedule, double gamma = 0.5);

/// (1 - s) v_uncond + s v_cond; equal to v_uncond + s (v_cond - v_uncond) and exact at s in {0, 1}.
Tensor cfg_combine(const Tensor& v_uncond, const Tensor& v_cond, double s);

} // namespace eegdiff::loss
