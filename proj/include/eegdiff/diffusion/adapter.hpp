#pragma once

#include <cstddef>

#include "eegdiff/nd/layers.hpp"

namespace eegdiff::diffusion {

inline constexpr std::size_t kAdapterTokens = 4;

/// f_adapt: Linear(D, D) -> LayerNorm -> Linear(D, 4D), reshaped to 4 tokens.
/// Parameters are named "adapter.*".
class Adapter {
public:
    Adapter(nd::ParamStore& store, std::size_t width, nd::Rng& rng);

    /// (N, D) -> (N, 4, D), or (D) -> (4, D).
    nd::Tensor operator()(const nd::Tensor& pooled) const;

    std::size_t width() const { return width_; }

private:
    std::size_t width_;
    nd::Linear fc1_;
    nd::LayerNorm norm_;
    nd::Linear fc2_;
};

/// Concatenates along the token axis, latent tokens first:
/// (T, D) + (4, D) -> (T+4, D), batched or not.
nd::Tensor build_condition(const nd::Tensor& z_latent, const nd::Tensor& z_adapt);

} // namespace eegdiff::diffusion
