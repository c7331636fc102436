#pragma once

#include <cstddef>
#include <vector>

#include "eegdiff/nd/layers.hpp"

namespace eegdiff::diffusion {

struct DenoiserConfig {
    std::size_t latent_channels = 4;
    std::size_t height = 8;   // even, halved once
    std::size_t width = 8;
    std::size_t level1 = 32;  // feature channels at full resolution
    std::size_t level2 = 64;  // feature channels at half resolution
    std::size_t attention_width = 32; // D'
    std::size_t heads = 4;
    std::size_t cond_tokens = 12;     // T + 4
    std::size_t cond_width = 32;      // D
    std::size_t time_features = 32;   // sinusoidal embedding size, even

    void validate() const;
};

/// Softmax weights of both cross-attention layers from the last forward call,
/// each (N * heads, positions, cond_tokens).
struct AttentionProbe {
    nd::Tensor level1;
    nd::Tensor level2;
};

/// v_theta(x_t, t, c): a two-level convolutional encoder/decoder with one
/// cross-attention block per level and a spatial self-attention block at the
/// coarse level. Parameters are named "unet.*"; the cross-attention
/// projections are "unet.level{1,2}.xattn.to_{q,k,v,out}.*" and the
/// self-attention ones "unet.level2.sattn.*".
class Denoiser {
public:
    Denoiser(const DenoiserConfig& cfg, nd::ParamStore& store, nd::Rng& rng);

    const DenoiserConfig& config() const { return cfg_; }

    /// x_t: (N, C, H, W); t: one step per item; condition: (N, L, D).
    nd::Tensor operator()(const nd::Tensor& x_t, const std::vector<std::size_t>& t, const nd::Tensor& condition,
                          AttentionProbe* probe = nullptr) const;

    /// Learned unconditional tokens, (L, D).
    const nd::Tensor& null_condition() const { return null_cond_; }
    /// null_condition broadcast to (n, L, D).
    nd::Tensor null_batch(std::size_t n) const;

private:
    nd::Tensor time_embedding(const std::vector<std::size_t>& t) const;
    nd::Tensor cross_attend(const nd::Tensor& h, const nd::Tensor& condition, const nd::AttentionProjections& proj,
                            nd::Tensor* weights) const;
    nd::Tensor self_attend(const nd::Tensor& h, const nd::AttentionProjections& proj) const;

    DenoiserConfig cfg_;
    nd::Tensor null_cond_;
    nd::Tensor pos_embed_;
    nd::Linear time_fc1_;
    nd::Linear time_fc2_;
    nd::Linear time_level2_;
    nd::Conv2d in_conv_;
    nd::Conv2d level1_conv_;
    nd::AttentionProjections level1_xattn_;
    nd::Conv2d down_conv_;
    nd::AttentionProjections level2_xattn_;
    nd::AttentionProjections level2_sattn_;
    nd::Conv2d mid_conv_;
    nd::Conv2d up_conv_;
    nd::Conv2d out_conv_;
};

/// Sinusoidal features [sin(t w_k), cos(t w_k)] with w_k = 10000^(-k / (dim/2)); (N, dim).
nd::Tensor sinusoidal_embedding(const std::vector<std::size_t>& t, std::size_t dim);

} // namespace eegdiff::diffusion
