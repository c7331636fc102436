#include "eegdiff/diffusion/denoiser.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace eegdiff::diffusion {

using nd::Tensor;

void DenoiserConfig::validate() const {
    for (std::size_t v : {latent_channels, height, width, level1, level2, attention_width, heads, cond_tokens,
                          cond_width, time_features}) {
        if (v == 0) throw std::invalid_argument("denoiser config: sizes must be positive");
    }
    if (height % 2 != 0 || width % 2 != 0) throw std::invalid_argument("denoiser config: latent grid must be even");
    if (attention_width % heads != 0) throw std::invalid_argument("denoiser config: D' not divisible by heads");
    if (time_features % 2 != 0) throw std::invalid_argument("denoiser config: time features must be even");
}

Tensor sinusoidal_embedding(const std::vector<std::size_t>& t, std::size_t dim) {
    const std::size_t half = dim / 2;
    std::vector<double> out(t.size() * dim);
    for (std::size_t n = 0; n < t.size(); ++n) {
        for (std::size_t k = 0; k < half; ++k) {
            const double w = std::pow(10000.0, -static_cast<double>(k) / static_cast<double>(half));
            out[n * dim + k] = std::sin(static_cast<double>(t[n]) * w);
            out[n * dim + half + k] = std::cos(static_cast<double>(t[n]) * w);
        }
    }
    return Tensor::from({t.size(), dim}, std::move(out));
}

Denoiser::Denoiser(const DenoiserConfig& cfg, nd::ParamStore& store, nd::Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t c = cfg.latent_channels, c1 = cfg.level1, c2 = cfg.level2, dp = cfg.attention_width;
    null_cond_ = store.add("unet.null_cond", rng.normal_tensor({cfg.cond_tokens, cfg.cond_width}, 1.0));
    pos_embed_ = store.add("unet.pos_embed", rng.normal_tensor({1, c1, cfg.height, cfg.width}, 0.1));
    time_fc1_ = nd::Linear(store, "unet.time.fc1", cfg.time_features, c1, rng);
    time_fc2_ = nd::Linear(store, "unet.time.fc2", c1, c1, rng);
    time_level2_ = nd::Linear(store, "unet.time.level2", c1, c2, rng);
    in_conv_ = nd::Conv2d(store, "unet.in_conv", c, c1, 3, rng);
    level1_conv_ = nd::Conv2d(store, "unet.level1.conv", c1, c1, 3, rng);
    level1_xattn_ = nd::make_attention(store, "unet.level1.xattn", c1, cfg.cond_width, dp, rng);
    down_conv_ = nd::Conv2d(store, "unet.down_conv", c1, c2, 3, rng);
    level2_xattn_ = nd::make_attention(store, "unet.level2.xattn", c2, cfg.cond_width, dp, rng);
    level2_sattn_ = nd::make_attention(store, "unet.level2.sattn", c2, c2, dp, rng);
    mid_conv_ = nd::Conv2d(store, "unet.mid_conv", c2, c2, 3, rng);
    up_conv_ = nd::Conv2d(store, "unet.up_conv", c1 + c2, c1, 3, rng);
    out_conv_ = nd::Conv2d(store, "unet.out_conv", c1, c, 3, rng);
}

Tensor Denoiser::null_batch(std::size_t n) const {
    const std::size_t l = cfg_.cond_tokens, d = cfg_.cond_width;
    return nd::broadcast_to(nd::reshape(null_cond_, {1, l, d}), {n, l, d});
}

Tensor Denoiser::time_embedding(const std::vector<std::size_t>& t) const {
    return nd::relu(time_fc2_(nd::relu(time_fc1_(sinusoidal_embedding(t, cfg_.time_features)))));
}

// h: (N, C, H, W) attends over condition tokens; returns h + attention output.
Tensor Denoiser::cross_attend(const Tensor& h, const Tensor& condition, const nd::AttentionProjections& proj,
                              Tensor* weights) const {
    const std::size_t n = h.dim(0), ch = h.dim(1), hh = h.dim(2), ww = h.dim(3);
    const Tensor queries = nd::permute(nd::reshape(h, {n, ch, hh * ww}), {0, 2, 1});
    const Tensor attended = nd::multi_head_attention(queries, condition, proj, cfg_.heads, weights);
    return nd::add(h, nd::reshape(nd::permute(attended, {0, 2, 1}), {n, ch, hh, ww}));
}

// h: (N, C, H, W) attends over its own positions; returns h + attention output.
Tensor Denoiser::self_attend(const Tensor& h, const nd::AttentionProjections& proj) const {
    const std::size_t n = h.dim(0), ch = h.dim(1), hh = h.dim(2), ww = h.dim(3);
    const Tensor tokens = nd::permute(nd::reshape(h, {n, ch, hh * ww}), {0, 2, 1});
    const Tensor attended = nd::multi_head_attention(tokens, tokens, proj, cfg_.heads);
    return nd::add(h, nd::reshape(nd::permute(attended, {0, 2, 1}), {n, ch, hh, ww}));
}

Tensor Denoiser::operator()(const Tensor& x_t, const std::vector<std::size_t>& t, const Tensor& condition,
                            AttentionProbe* probe) const {
    if (x_t.rank() != 4 || x_t.dim(1) != cfg_.latent_channels || x_t.dim(2) != cfg_.height ||
        x_t.dim(3) != cfg_.width) {
        throw nd::ShapeError("denoiser: expected (N, " + std::to_string(cfg_.latent_channels) + ", " +
                             std::to_string(cfg_.height) + ", " + std::to_string(cfg_.width) + ") latents, got " +
                             nd::shape_str(x_t.shape()));
    }
    const std::size_t n = x_t.dim(0);
    if (t.size() != n) throw nd::ShapeError("denoiser: " + std::to_string(t.size()) + " timesteps for batch " + std::to_string(n));
    if (condition.rank() != 3 || condition.dim(0) != n || condition.dim(1) != cfg_.cond_tokens ||
        condition.dim(2) != cfg_.cond_width) {
        throw nd::ShapeError("denoiser: condition " + nd::shape_str(condition.shape()) + " does not match (" +
                             std::to_string(n) + ", " + std::to_string(cfg_.cond_tokens) + ", " +
                             std::to_string(cfg_.cond_width) + ")");
    }
    const std::size_t c1 = cfg_.level1, c2 = cfg_.level2;
    const Tensor temb = time_embedding(t);
    const Tensor t1 = nd::reshape(temb, {n, c1, 1, 1});
    const Tensor t2 = nd::reshape(time_level2_(temb), {n, c2, 1, 1});

    Tensor h = nd::relu(nd::add(nd::add(in_conv_(x_t), pos_embed_), t1));
    h = nd::add(h, nd::relu(level1_conv_(h)));
    const Tensor skip = cross_attend(h, condition, level1_xattn_, probe ? &probe->level1 : nullptr);

    Tensor g = nd::relu(nd::add(down_conv_(nd::avg_pool2(skip)), t2));
    g = cross_attend(g, condition, level2_xattn_, probe ? &probe->level2 : nullptr);
    g = self_attend(g, level2_sattn_);
    g = nd::add(g, nd::relu(mid_conv_(g)));

    const Tensor up = nd::relu(up_conv_(nd::concat({nd::upsample2(g), skip}, 1)));
    return out_conv_(up);
}

} // namespace eegdiff::diffusion
