#include "eegdiff/model/encoder.hpp"

#include <stdexcept>
#include <string>

namespace eegdiff::model {

using nd::Tensor;

void EncoderConfig::validate() const {
    for (std::size_t v : {channels, samples, tokens, width, temporal_width, heads}) {
        if (v == 0) throw std::invalid_argument("encoder config: dimensions and head count must be positive");
    }
    if (temporal_width % heads != 0) {
        throw std::invalid_argument("encoder config: D_T=" + std::to_string(temporal_width) +
                                    " is not divisible by " + std::to_string(heads) + " heads");
    }
}

EncoderConfig EncoderConfig::paper(std::size_t temporal_width) {
    EncoderConfig c;
    c.channels = 128;
    c.samples = 440;
    c.tokens = 77;
    c.width = 1024;
    c.temporal_width = temporal_width;
    c.heads = 8;
    c.depth = 2;
    return c;
}

Autoencoder::Autoencoder(const EncoderConfig& cfg, nd::ParamStore& store, nd::Rng& rng)
    : cfg_(cfg), bn_((cfg.validate(), cfg.temporal_width)) {
    const std::size_t C = cfg.channels, S = cfg.samples, DT = cfg.temporal_width;
    temporal_proj_ = nd::Linear(store, "enc.temporal.proj", S, DT, rng);
    if (S != DT) temporal_shortcut_ = nd::Linear(store, "enc.temporal.shortcut", S, DT, rng);
    bn_gamma_ = store.add("enc.temporal.bn.gamma", Tensor::full({DT}, 1.0));
    bn_beta_ = store.add("enc.temporal.bn.beta", Tensor::zeros({DT}));
    bn_.running_mean = store.add_buffer("enc.temporal.bn.running_mean", bn_.running_mean);
    bn_.running_var = store.add_buffer("enc.temporal.bn.running_var", bn_.running_var);
    for (std::size_t i = 0; i < cfg.depth; ++i) {
        const std::string name = "enc.spatial." + std::to_string(i);
        attention_.push_back(nd::make_attention(store, name + ".attn", DT, DT, DT, rng));
        norms_.emplace_back(store, name + ".norm", DT);
    }
    bottleneck_ = nd::Linear(store, "enc.bottleneck", C * DT, cfg.tokens * cfg.width, rng);
    expand_ = nd::Linear(store, "dec.expand", cfg.tokens * cfg.width, C * DT, rng);
    channel_out_ = nd::Linear(store, "dec.channel_out", DT, S, rng);
}

namespace {

void expect_shape(const Tensor& x, std::size_t d1, std::size_t d2, const char* what) {
    if (x.rank() != 3 || x.dim(1) != d1 || x.dim(2) != d2) {
        throw nd::ShapeError(std::string(what) + ": expected (N, " + std::to_string(d1) + ", " +
                             std::to_string(d2) + "), got " + nd::shape_str(x.shape()));
    }
}

Tensor lift(const Tensor& x) {
    if (x.rank() != 2) return x;
    return nd::reshape(x, {1, x.dim(0), x.dim(1)});
}

Tensor lower(const Tensor& x, bool was_single) {
    return was_single ? nd::reshape(x, {x.dim(1), x.dim(2)}) : x;
}

} // namespace

Tensor Autoencoder::temporal_block(const Tensor& windows) const {
    expect_shape(windows, cfg_.channels, cfg_.samples, "temporal_block");
    Tensor h = nd::batch_norm(temporal_proj_(windows), bn_, training_);
    h = nd::relu(nd::add(nd::mul(h, bn_gamma_), bn_beta_));
    const Tensor shortcut = cfg_.samples == cfg_.temporal_width ? windows : temporal_shortcut_(windows);
    return nd::add(h, shortcut);
}

Tensor Autoencoder::spatial_block(std::size_t index, const Tensor& tokens, Tensor* weights) const {
    if (tokens.rank() != 3 || tokens.dim(2) != cfg_.temporal_width) {
        throw nd::ShapeError("spatial_block: expected (N, C, " + std::to_string(cfg_.temporal_width) + "), got " +
                             nd::shape_str(tokens.shape()));
    }
    const Tensor attended = nd::multi_head_attention(tokens, tokens, attention_.at(index), cfg_.heads, weights);
    return norms_[index](nd::add(tokens, attended));
}

Tensor Autoencoder::encode(const Tensor& windows) const {
    const bool single = windows.rank() == 2;
    const Tensor x = lift(windows);
    expect_shape(x, cfg_.channels, cfg_.samples, "encode");
    Tensor h = temporal_block(x);
    for (std::size_t i = 0; i < cfg_.depth; ++i) h = spatial_block(i, h);
    const std::size_t n = x.dim(0);
    const Tensor z = bottleneck_(nd::reshape(h, {n, cfg_.channels * cfg_.temporal_width}));
    return lower(nd::reshape(z, {n, cfg_.tokens, cfg_.width}), single);
}

Tensor Autoencoder::decode(const Tensor& latents) const {
    const bool single = latents.rank() == 2;
    const Tensor z = lift(latents);
    expect_shape(z, cfg_.tokens, cfg_.width, "decode");
    const std::size_t n = z.dim(0);
    const Tensor h = expand_(nd::reshape(z, {n, cfg_.tokens * cfg_.width}));
    const Tensor out = channel_out_(nd::reshape(h, {n, cfg_.channels, cfg_.temporal_width}));
    return lower(out, single);
}

Tensor mean_pool_latent(const Tensor& latents) {
    if (latents.rank() != 2 && latents.rank() != 3) {
        throw nd::ShapeError("mean_pool_latent: expected (T, D) or (N, T, D), got " + nd::shape_str(latents.shape()));
    }
    return nd::mean(latents, static_cast<std::ptrdiff_t>(latents.rank()) - 2);
}

} // namespace eegdiff::model
