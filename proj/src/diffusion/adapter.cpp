#include "eegdiff/diffusion/adapter.hpp"

#include <string>

namespace eegdiff::diffusion {

using nd::Tensor;

Adapter::Adapter(nd::ParamStore& store, std::size_t width, nd::Rng& rng)
    : width_(width),
      fc1_(store, "adapter.fc1", width, width, rng),
      norm_(store, "adapter.norm", width),
      fc2_(store, "adapter.fc2", width, kAdapterTokens * width, rng) {}

Tensor Adapter::operator()(const Tensor& pooled) const {
    if ((pooled.rank() != 1 && pooled.rank() != 2) || pooled.shape().back() != width_) {
        throw nd::ShapeError("adapter: expected (N, " + std::to_string(width_) + ") input, got " +
                             nd::shape_str(pooled.shape()));
    }
    const bool single = pooled.rank() == 1;
    const Tensor x = single ? nd::reshape(pooled, {1, width_}) : pooled;
    const Tensor y = fc2_(norm_(fc1_(x)));
    if (single) return nd::reshape(y, {kAdapterTokens, width_});
    return nd::reshape(y, {x.dim(0), kAdapterTokens, width_});
}

Tensor build_condition(const Tensor& z_latent, const Tensor& z_adapt) {
    const bool ranks_ok = z_latent.rank() == z_adapt.rank() && (z_latent.rank() == 2 || z_latent.rank() == 3);
    if (!ranks_ok || z_latent.shape().back() != z_adapt.shape().back() ||
        (z_latent.rank() == 3 && z_latent.dim(0) != z_adapt.dim(0))) {
        throw nd::ShapeError("build_condition: cannot join " + nd::shape_str(z_latent.shape()) + " and " +
                             nd::shape_str(z_adapt.shape()));
    }
    return nd::concat({z_latent, z_adapt}, -2);
}

} // namespace eegdiff::diffusion
