#pragma once

#include <cstddef>
#include <string>

#include "eegdiff/nd/ops.hpp"
#include "eegdiff/nd/params.hpp"
#include "eegdiff/nd/random.hpp"

namespace eegdiff::nd {

/// Affine map over the last axis: y = x W + b, W of shape (in, out).
class Linear {
public:
    Linear() = default;
    Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng);

    Tensor operator()(const Tensor& x) const;

    const Tensor& weight() const { return weight_; }
    const Tensor& bias() const { return bias_; }
    std::size_t in_features() const { return weight_.dim(0); }
    std::size_t out_features() const { return weight_.dim(1); }

private:
    Tensor weight_;
    Tensor bias_;
};

/// layer_norm followed by a learned per-feature scale and shift.
class LayerNorm {
public:
    LayerNorm() = default;
    LayerNorm(ParamStore& store, const std::string& name, std::size_t features);

    Tensor operator()(const Tensor& x) const;

private:
    Tensor gamma_;
    Tensor beta_;
};

/// Same-padded stride-1 convolution with bias; weight (out, in, k, k).
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, std::size_t kernel, Rng& rng);

    Tensor operator()(const Tensor& x) const;

private:
    Tensor weight_;
    Tensor bias_;
};

struct AttentionProjections {
    Linear to_q;
    Linear to_k;
    Linear to_v;
    Linear to_out;
};

/// Builds projections named `<name>.to_q` ... `<name>.to_out`. Queries come from
/// width `query_width`, keys and values from width `context_width`; heads split
/// the attention width `inner_width`.
AttentionProjections make_attention(ParamStore& store, const std::string& name, std::size_t query_width,
                                    std::size_t context_width, std::size_t inner_width, Rng& rng);

/// Scaled dot-product attention with `heads` heads.
/// queries: (N, Lq, Dq), context: (N, Lk, Dk) -> (N, Lq, Dq).
/// When `weights` is given it receives the softmax matrix, shape (N*heads, Lq, Lk).
Tensor multi_head_attention(const Tensor& queries, const Tensor& context, const AttentionProjections& proj,
                            std::size_t heads, Tensor* weights = nullptr);

} // namespace eegdiff::nd
