#include "eegdiff/nd/layers.hpp"

#include <cmath>

namespace eegdiff::nd {

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    weight_ = store.add(name + ".weight", rng.normal_tensor({in, out}, scale));
    bias_ = store.add(name + ".bias", Tensor::zeros({out}));
}

Tensor Linear::operator()(const Tensor& x) const {
    if (x.shape().back() != in_features()) {
        throw ShapeError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                         shape_str(weight_.shape()));
    }
    return add(matmul(x, weight_), bias_);
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::size_t features) {
    gamma_ = store.add(name + ".gamma", Tensor::full({features}, 1.0));
    beta_ = store.add(name + ".beta", Tensor::zeros({features}));
}

Tensor LayerNorm::operator()(const Tensor& x) const {
    return add(mul(layer_norm(x), gamma_), beta_);
}

Conv2d::Conv2d(ParamStore& store, const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
               Rng& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(in * kernel * kernel));
    weight_ = store.add(name + ".weight", rng.normal_tensor({out, in, kernel, kernel}, scale));
    bias_ = store.add(name + ".bias", Tensor::zeros({out}));
}

Tensor Conv2d::operator()(const Tensor& x) const {
    return add(conv2d(x, weight_), reshape(bias_, {1, bias_.size(), 1, 1}));
}

AttentionProjections make_attention(ParamStore& store, const std::string& name, std::size_t query_width,
                                    std::size_t context_width, std::size_t inner_width, Rng& rng) {
    AttentionProjections p;
    p.to_q = Linear(store, name + ".to_q", query_width, inner_width, rng);
    p.to_k = Linear(store, name + ".to_k", context_width, inner_width, rng);
    p.to_v = Linear(store, name + ".to_v", context_width, inner_width, rng);
    p.to_out = Linear(store, name + ".to_out", inner_width, query_width, rng);
    return p;
}

namespace {

// (N, L, H*dh) -> (N*H, L, dh)
Tensor split_heads(const Tensor& x, std::size_t heads) {
    const std::size_t n = x.dim(0), len = x.dim(1), width = x.dim(2);
    const std::size_t dh = width / heads;
    return reshape(permute(reshape(x, {n, len, heads, dh}), {0, 2, 1, 3}), {n * heads, len, dh});
}

Tensor merge_heads(const Tensor& x, std::size_t n, std::size_t heads) {
    const std::size_t len = x.dim(1), dh = x.dim(2);
    return reshape(permute(reshape(x, {n, heads, len, dh}), {0, 2, 1, 3}), {n, len, heads * dh});
}

} // namespace

Tensor multi_head_attention(const Tensor& queries, const Tensor& context, const AttentionProjections& proj,
                            std::size_t heads, Tensor* weights) {
    if (queries.rank() != 3 || context.rank() != 3 || queries.dim(0) != context.dim(0)) {
        throw ShapeError("attention: expected (N, L, D) queries and context, got " + shape_str(queries.shape()) +
                         " and " + shape_str(context.shape()));
    }
    const std::size_t inner = proj.to_q.out_features();
    if (heads == 0 || inner % heads != 0) {
        throw std::invalid_argument("attention: width " + std::to_string(inner) + " not divisible by " +
                                    std::to_string(heads) + " heads");
    }
    const std::size_t n = queries.dim(0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(inner / heads));

    const Tensor q = split_heads(proj.to_q(queries), heads);
    const Tensor k = split_heads(proj.to_k(context), heads);
    const Tensor v = split_heads(proj.to_v(context), heads);
    const Tensor attn = softmax(scalar_mul(matmul(q, transpose(k)), scale), -1);
    if (weights) *weights = attn;
    return proj.to_out(merge_heads(matmul(attn, v), n, heads));
}

} // namespace eegdiff::nd
