#include "eegdiff/loss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eegdiff::loss {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw nd::ShapeError(std::string(what) + ": shapes " + nd::shape_str(a.shape()) + " and " +
                             nd::shape_str(b.shape()) + " differ");
    }
}

Tensor coefficients(const Tensor& x, const std::vector<double>& coeffs) {
    if (x.rank() == 0 || x.dim(0) != coeffs.size()) {
        throw nd::ShapeError("per-item coefficients: " + std::to_string(coeffs.size()) + " values for batch " +
                             nd::shape_str(x.shape()));
    }
    nd::Shape shape(x.rank(), 1);
    shape[0] = coeffs.size();
    return Tensor::from(shape, coeffs);
}

std::vector<double> gather(const std::vector<double>& table, const std::vector<std::size_t>& t,
                           const diffusion::NoiseSchedule& schedule) {
    std::vector<double> out;
    out.reserve(t.size());
    for (std::size_t step : t) {
        schedule.check_step(step);
        out.push_back(table[step]);
    }
    return out;
}

} // namespace

void LossWeights::validate() const {
    for (double v : {sdsc, mse, cos, recon, align, con}) {
        if (!(v >= 0.0)) throw std::invalid_argument("loss weights must be non-negative");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("contrastive temperature must be positive");
}

Tensor sdsc_loss(const Tensor& e, const Tensor& e_hat) {
    require_same(e, e_hat, "sdsc_loss");
    const Tensor abs_e = nd::abs(e), abs_h = nd::abs(e_hat);
    const Tensor denom = nd::sum(nd::add(abs_e, abs_h));
    if (denom.item() < kSdscNullThreshold) return Tensor::scalar(0.0);
    const Tensor overlap = nd::sum(nd::mul(nd::sigmoid(nd::mul(e, e_hat)), nd::minimum(abs_e, abs_h)));
    return nd::add_scalar(nd::scalar_mul(nd::mul(overlap, nd::power(denom, -1.0)), -2.0), 1.0);
}

Tensor mse_loss(const Tensor& a, const Tensor& b) {
    require_same(a, b, "mse_loss");
    const Tensor d = nd::sub(a, b);
    return nd::mean(nd::mul(d, d));
}

Tensor recon_loss(const Tensor& e, const Tensor& e_hat, const LossWeights& w) {
    Tensor loss = mse_loss(e, e_hat);
    if (w.sdsc != 0.0) loss = nd::add(loss, nd::scalar_mul(sdsc_loss(e, e_hat), w.sdsc));
    return loss;
}

Tensor text_align_loss(const Tensor& z_latent, const Tensor& z_text, const LossWeights& w) {
    require_same(z_latent, z_text, "text_align_loss");
    const Tensor cos_term = nd::add_scalar(nd::scalar_mul(nd::mean(nd::cosine_similarity(z_latent, z_text, -1)), -1.0), 1.0);
    return nd::add(nd::scalar_mul(mse_loss(z_latent, z_text), w.mse), nd::scalar_mul(cos_term, w.cos));
}

Tensor contrastive_loss(const Tensor& pooled, const Tensor& image, double tau) {
    require_same(pooled, image, "contrastive_loss");
    if (pooled.rank() != 2) throw nd::ShapeError("contrastive_loss: expected (N, D), got " + nd::shape_str(pooled.shape()));
    const std::size_t n = pooled.dim(0), d = pooled.dim(1);
    if (n == 0) throw std::invalid_argument("contrastive_loss: empty batch");
    if (!(tau > 0.0)) throw std::invalid_argument("contrastive_loss: temperature must be positive");

    // sim[i][j] = cos(pooled_i, image_j)
    const Tensor a = nd::broadcast_to(nd::reshape(pooled, {n, 1, d}), {n, n, d});
    const Tensor b = nd::broadcast_to(nd::reshape(image, {1, n, d}), {n, n, d});
    const Tensor logits = nd::scalar_mul(nd::cosine_similarity(a, b, -1), 1.0 / tau);

    // Row max is a constant shift; detaching it leaves the gradient unchanged.
    std::vector<double> row_max(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = logits.data().subspan(i * n, n);
        row_max[i] = *std::max_element(row.begin(), row.end());
    }
    const Tensor shift = Tensor::from({n, 1}, row_max);
    const Tensor lse = nd::add(nd::log(nd::sum(nd::exp(nd::sub(logits, shift)), 1, true)), shift);

    std::vector<double> eye(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
    const Tensor positives = nd::sum(nd::mul(logits, Tensor::from({n, n}, eye)), 1, true);
    return nd::mean(nd::sub(lse, positives));
}

Tensor stage1_loss(const Tensor& e, const Tensor& e_hat, const Tensor& z_latent, const Tensor& z_text,
                   const Tensor& pooled, const Tensor& image, const LossWeights& w) {
    w.validate();
    Tensor total = Tensor::scalar(0.0);
    if (w.recon != 0.0) total = nd::add(total, nd::scalar_mul(recon_loss(e, e_hat, w), w.recon));
    if (w.align != 0.0) total = nd::add(total, nd::scalar_mul(text_align_loss(z_latent, z_text, w), w.align));
    if (w.con != 0.0) total = nd::add(total, nd::scalar_mul(contrastive_loss(pooled, image, w.tau), w.con));
    return total;
}

Tensor scale_items(const Tensor& x, const std::vector<double>& coeffs) {
    return nd::mul(x, coefficients(x, coeffs));
}

Tensor diffuse(const Tensor& x0, const Tensor& eps, const std::vector<std::size_t>& t,
               const diffusion::NoiseSchedule& schedule) {
    require_same(x0, eps, "diffuse");
    return nd::add(scale_items(x0, gather(schedule.alpha, t, schedule)),
                   scale_items(eps, gather(schedule.sigma, t, schedule)));
}

Tensor v_target(const Tensor& x0, const Tensor& eps, const std::vector<std::size_t>& t,
                const diffusion::NoiseSchedule& schedule) {
    require_same(x0, eps, "v_target");
    return nd::sub(scale_items(eps, gather(schedule.alpha, t, schedule)),
                   scale_items(x0, gather(schedule.sigma, t, schedule)));
}

Tensor x0_from_v(const Tensor& x_t, const Tensor& v, const std::vector<std::size_t>& t,
                 const diffusion::NoiseSchedule& schedule) {
    require_same(x_t, v, "x0_from_v");
    return nd::sub(scale_items(x_t, gather(schedule.alpha, t, schedule)),
                   scale_items(v, gather(schedule.sigma, t, schedule)));
}

Tensor eps_from_v(const Tensor& x_t, const Tensor& v, const std::vector<std::size_t>& t,
                  const diffusion::NoiseSchedule& schedule) {
    require_same(x_t, v, "eps_from_v");
    return nd::add(scale_items(x_t, gather(schedule.sigma, t, schedule)),
                   scale_items(v, gather(schedule.alpha, t, schedule)));
}

Tensor v_loss(const Tensor& x0, const Tensor& eps, const std::vector<std::size_t>& t, const VModel& model,
              const diffusion::NoiseSchedule& schedule, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("v_loss: gamma must be non-negative");
    const Tensor x_t = diffuse(x0, eps, t, schedule);
    const Tensor target = v_target(x0, eps, t, schedule);
    const Tensor pred = model(x_t, t);
    require_same(pred, target, "v_loss prediction");

    const std::size_t n = x0.dim(0);
    const Tensor d = nd::sub(pred, target);
    const Tensor per_item = nd::mean(nd::reshape(nd::mul(d, d), {n, x0.size() / n}), 1);
    std::vector<double> w;
    for (std::size_t step : t) w.push_back(schedule.weight(step, gamma));
    return nd::mean(nd::mul(per_item, Tensor::from({n}, w)));
}

Tensor cfg_combine(const Tensor& v_uncond, const Tensor& v_cond, double s) {
    require_same(v_uncond, v_cond, "cfg_combine");
    return nd::add(nd::scalar_mul(v_uncond, 1.0 - s), nd::scalar_mul(v_cond, s));
}

} // namespace eegdiff::loss
