#include "eegdiff/nd/grad_check.hpp"
#include "eegdiff/train/pipeline.hpp"

namespace eegdiff::train {

namespace {

model::EncoderConfig small_encoder() {
    model::EncoderConfig c;
    c.channels = 5;
    c.samples = 6;
    c.tokens = 2;
    c.width = 3;
    c.temporal_width = 4;
    c.heads = 2;
    c.depth = 2;
    return c;
}

diffusion::DenoiserConfig small_denoiser() {
    diffusion::DenoiserConfig c;
    c.latent_channels = 2;
    c.height = 4;
    c.width = 4;
    c.level1 = 4;
    c.level2 = 6;
    c.attention_width = 4;
    c.heads = 2;
    c.cond_tokens = 2 + diffusion::kAdapterTokens;
    c.cond_width = 3;
    c.time_features = 4;
    return c;
}

// Central-difference step. Stage-1 and denoiser targets contain ReLU kinks; at 1e-5
// one seed places a batch-normalized pre-activation inside the step and the
// difference straddles the kink.
constexpr double kStep = 1e-6;

// Fixed random projection to a scalar, so every output component is checked.
nd::Tensor scalarize(const nd::Tensor& y, const nd::Tensor& mix) { return nd::sum(nd::mul(y, mix)); }

} // namespace

std::vector<GradCheckRow> gradient_suite(std::size_t seeds) {
    std::vector<GradCheckRow> rows;
    loss::LossWeights w;
    const auto schedule = diffusion::build_schedule(1000, 1e-4, 0.02);
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        auto check = [&](const std::string& target, const nd::ScalarFn& fn, nd::Tensor point) {
            rows.push_back({target, seed, nd::grad_check(fn, point, kStep)});
        };
        nd::Rng rng(seed + 1000);

        const nd::Tensor target = rng.normal_tensor({2, 3, 5});
        check("sdsc_loss", [&](const nd::Tensor& x) { return loss::sdsc_loss(target, x); }, rng.normal_tensor({2, 3, 5}));
        check("recon_loss", [&](const nd::Tensor& x) { return loss::recon_loss(target, x, w); },
              rng.normal_tensor({2, 3, 5}));
        const nd::Tensor text = rng.normal_tensor({2, 3, 4});
        check("text_align_loss", [&](const nd::Tensor& z) { return loss::text_align_loss(z, text, w); },
              rng.normal_tensor({2, 3, 4}));
        const nd::Tensor image = rng.normal_tensor({4, 5});
        check("contrastive_loss", [&](const nd::Tensor& p) { return loss::contrastive_loss(p, image, w.tau); },
              rng.normal_tensor({4, 5}));

        nd::ParamStore enc_store;
        model::Autoencoder ae(small_encoder(), enc_store, rng);
        ae.set_training(true);
        const nd::Tensor z_text = rng.normal_tensor({3, 2, 3});
        const nd::Tensor img = rng.normal_tensor({3, 3});
        check("stage1_loss",
              [&](const nd::Tensor& e) {
                  const nd::Tensor z = ae.encode(e);
                  return loss::stage1_loss(e, ae.decode(z), z, z_text, model::mean_pool_latent(z), img, w);
              },
              rng.normal_tensor({3, 5, 6}));
        const nd::Tensor enc_mix = rng.normal_tensor({3, 5, 6});
        check("encode_decode", [&](const nd::Tensor& e) { return scalarize(ae.decode(ae.encode(e)), enc_mix); },
              rng.normal_tensor({3, 5, 6}));

        nd::ParamStore diff_store;
        diffusion::Denoiser denoiser(small_denoiser(), diff_store, rng);
        diffusion::Adapter adapter(diff_store, 3, rng);
        const nd::Tensor adapt_mix = rng.normal_tensor({2, diffusion::kAdapterTokens, 3});
        check("adapt", [&](const nd::Tensor& p) { return scalarize(adapter(p), adapt_mix); }, rng.normal_tensor({2, 3}));

        const nd::Tensor cond = rng.normal_tensor({2, 2 + diffusion::kAdapterTokens, 3});
        const std::vector<std::size_t> t{rng.index(1000), rng.index(1000)};
        const nd::Tensor den_mix = rng.normal_tensor({2, 2, 4, 4});
        check("denoise", [&](const nd::Tensor& x) { return scalarize(denoiser(x, t, cond), den_mix); },
              rng.normal_tensor({2, 2, 4, 4}));

        const nd::Tensor eps = rng.normal_tensor({2, 2, 4, 4});
        const loss::VModel v_model = [&](const nd::Tensor& x_t, const std::vector<std::size_t>& ts) {
            return denoiser(x_t, ts, cond);
        };
        check("v_loss", [&](const nd::Tensor& x0) { return loss::v_loss(x0, eps, t, v_model, schedule); },
              rng.normal_tensor({2, 2, 4, 4}));
    }
    return rows;
}

} // namespace eegdiff::train
