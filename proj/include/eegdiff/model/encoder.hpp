#pragma once

#include <cstddef>
#include <vector>

#include "eegdiff/nd/layers.hpp"
#include "eegdiff/nd/ops.hpp"
#include "eegdiff/nd/params.hpp"
#include "eegdiff/nd/random.hpp"

namespace eegdiff::model {

struct EncoderConfig {
    std::size_t channels = 16;        // C
    std::size_t samples = 64;         // S
    std::size_t tokens = 8;           // T
    std::size_t width = 32;           // D
    std::size_t temporal_width = 128; // D_T
    std::size_t heads = 8;
    std::size_t depth = 2;

    /// Throws std::invalid_argument for zero dims or D_T not divisible by heads.
    void validate() const;

    /// C=128, S=440, T=77, D=1024 with the given temporal width.
    static EncoderConfig paper(std::size_t temporal_width = 8);
};

/// f_enc / f_dec. Parameters live in the store under "enc.*" and "dec.*";
/// batch-norm running statistics are buffers. All tensors are batched:
/// windows (N, C, S), latents (N, T, D). Rank-2 inputs are treated as N = 1
/// and return rank-2 outputs.
class Autoencoder {
public:
    Autoencoder(const EncoderConfig& cfg, nd::ParamStore& store, nd::Rng& rng);

    const EncoderConfig& config() const { return cfg_; }

    /// Training mode normalizes with batch statistics and updates the running ones.
    void set_training(bool training) { training_ = training; }
    bool training() const { return training_; }

    /// relu(BN(x W + b)) + shortcut(x); (N, C, S) -> (N, C, D_T).
    nd::Tensor temporal_block(const nd::Tensor& windows) const;
    /// LN(x + MHA(x)) across channels; (N, C, D_T) -> (N, C, D_T).
    /// `weights` receives the attention matrix, shape (N * heads, C, C).
    nd::Tensor spatial_block(std::size_t index, const nd::Tensor& tokens, nd::Tensor* weights = nullptr) const;

    nd::Tensor encode(const nd::Tensor& windows) const;
    nd::Tensor decode(const nd::Tensor& latents) const;

private:
    EncoderConfig cfg_;
    bool training_ = false;
    nd::Linear temporal_proj_;
    nd::Linear temporal_shortcut_; // unset when S == D_T
    nd::Tensor bn_gamma_;
    nd::Tensor bn_beta_;
    mutable nd::BatchNormState bn_;
    std::vector<nd::AttentionProjections> attention_;
    std::vector<nd::LayerNorm> norms_;
    nd::Linear bottleneck_;
    nd::Linear expand_;
    nd::Linear channel_out_;
};

/// Mean over the token axis: (N, T, D) -> (N, D), or (T, D) -> (D).
nd::Tensor mean_pool_latent(const nd::Tensor& latents);

} // namespace eegdiff::model
