#include "eegdiff/diffusion/training.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "eegdiff/loss/losses.hpp"
#include "eegdiff/model/encoder.hpp"
#include "eegdiff/nd/graph.hpp"

namespace eegdiff::diffusion {

using nd::Tensor;

bool is_selective_name(const std::string& name) {
    if (name.rfind("adapter.", 0) == 0) return true;
    return name.find(".xattn.to_k.") != std::string::npos || name.find(".xattn.to_v.") != std::string::npos;
}

TrainMask::TrainMask(std::set<std::string> names, const nd::ParamStore& store) : names_(std::move(names)) {
    for (const auto& name : names_) {
        if (!store.contains(name) || store.is_buffer(name)) {
            throw std::invalid_argument("train mask names unknown parameter '" + name + "'");
        }
    }
}

TrainMask TrainMask::selective(const nd::ParamStore& store) {
    std::set<std::string> names;
    for (const auto& name : store.parameter_names()) {
        if (is_selective_name(name)) names.insert(name);
    }
    return TrainMask(std::move(names), store);
}

TrainMask TrainMask::with_prefix(const nd::ParamStore& store, const std::string& prefix) {
    std::set<std::string> names;
    for (const auto& name : store.parameter_names()) {
        if (name.rfind(prefix, 0) == 0) names.insert(name);
    }
    return TrainMask(std::move(names), store);
}

void TrainMask::apply(nd::ParamStore& store) const {
    for (const auto& name : store.parameter_names()) {
        Tensor p = store.at(name);
        p.set_requires_grad(contains(name));
    }
}

std::string TrainMask::to_json() const { return nlohmann::json(names_).dump(); }

StepNoise draw_step_noise(const Tensor& x0, const NoiseSchedule& schedule, double drop_prob, nd::Rng& rng) {
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw std::invalid_argument("drop_prob must lie in [0, 1]");
    StepNoise s;
    const std::size_t n = x0.dim(0);
    for (std::size_t i = 0; i < n; ++i) s.t.push_back(rng.index(schedule.steps()));
    s.eps = rng.normal_tensor(x0.shape());
    for (std::size_t i = 0; i < n; ++i) s.dropped.push_back(rng.bernoulli(drop_prob));
    return s;
}

Tensor drop_conditions(const Tensor& condition, const std::vector<bool>& dropped, const Denoiser& model) {
    const std::size_t n = condition.dim(0);
    if (dropped.size() != n) throw nd::ShapeError("drop_conditions: mask length does not match batch");
    std::vector<double> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = dropped[i] ? 0.0 : 1.0;
    const Tensor keep_t = Tensor::from({n, 1, 1}, keep);
    std::vector<double> drop(n);
    for (std::size_t i = 0; i < n; ++i) drop[i] = 1.0 - keep[i];
    return nd::add(nd::mul(condition, keep_t), nd::mul(model.null_batch(n), Tensor::from({n, 1, 1}, drop)));
}

Tensor eeg_condition(const Tensor& z_latent, const Adapter& adapter) {
    return build_condition(z_latent, adapter(model::mean_pool_latent(z_latent)));
}

Tensor text_condition(const Tensor& z_text) {
    nd::Shape pad = z_text.shape();
    pad[pad.size() - 2] = kAdapterTokens;
    return build_condition(z_text, Tensor::zeros(pad));
}

Tensor conditioned_v_loss(const Tensor& x0, const Tensor& condition, const StepNoise& noise, const Denoiser& model,
                          const NoiseSchedule& schedule, double gamma) {
    const Tensor c = drop_conditions(condition, noise.dropped, model);
    const loss::VModel v_model = [&](const Tensor& x_t, const std::vector<std::size_t>& t) { return model(x_t, t, c); };
    return loss::v_loss(x0, noise.eps, noise.t, v_model, schedule, gamma);
}

namespace {

double optimize(const Tensor& loss_value, nd::Adam& optimizer) {
    const double value = loss_value.item();
    if (!std::isfinite(value)) throw nd::DomainError("diffusion training produced a non-finite loss");
    optimizer.step(nd::backward(loss_value));
    return value;
}

} // namespace

double stage2_train_step(const DiffusionBatch& batch, const Denoiser& model, const Adapter& adapter,
                         const TrainMask& mask, double drop_prob, nd::Adam& optimizer, const NoiseSchedule& schedule,
                         nd::Rng& rng, double gamma) {
    if (optimizer.names() != mask.names()) {
        throw std::invalid_argument("stage 2 optimizer must cover exactly the train mask");
    }
    const StepNoise noise = draw_step_noise(batch.x0, schedule, drop_prob, rng);
    const Tensor cond = eeg_condition(batch.z_latent, adapter);
    return optimize(conditioned_v_loss(batch.x0, cond, noise, model, schedule, gamma), optimizer);
}

double base_train_step(const DiffusionBatch& batch, const Denoiser& model, double drop_prob, nd::Adam& optimizer,
                       const NoiseSchedule& schedule, nd::Rng& rng, double gamma) {
    const StepNoise noise = draw_step_noise(batch.x0, schedule, drop_prob, rng);
    return optimize(conditioned_v_loss(batch.x0, text_condition(batch.z_latent), noise, model, schedule, gamma),
                    optimizer);
}

std::vector<std::size_t> sampling_timesteps(const NoiseSchedule& schedule, std::size_t steps) {
    if (steps == 0 || steps > schedule.steps()) {
        throw std::invalid_argument("sampling steps must lie in [1, " + std::to_string(schedule.steps()) + "]");
    }
    std::vector<std::size_t> ts;
    const std::size_t last = schedule.steps() - 1;
    for (std::size_t i = 0; i < steps; ++i) {
        ts.push_back(steps == 1 ? last : last - (i * last) / (steps - 1));
    }
    return ts;
}

Tensor sample_with_condition(const Denoiser& model, const Tensor& condition, const NoiseSchedule& schedule,
                             double guidance, std::size_t steps, std::uint64_t seed) {
    if (!(guidance >= 0.0)) throw std::invalid_argument("guidance scale must be non-negative");
    const auto ts = sampling_timesteps(schedule, steps);
    const nd::NoGradGuard no_grad;
    const DenoiserConfig& cfg = model.config();
    const std::size_t n = condition.dim(0);
    nd::Rng rng(seed);
    Tensor x = rng.normal_tensor({n, cfg.latent_channels, cfg.height, cfg.width});
    const Tensor null_cond = model.null_batch(n);
    Tensor x0_hat;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::vector<std::size_t> t(n, ts[i]);
        const Tensor v_uncond = model(x, t, null_cond);
        const Tensor v_cond = model(x, t, condition);
        const Tensor v = loss::cfg_combine(v_uncond, v_cond, guidance);
        x0_hat = loss::x0_from_v(x, v, t, schedule);
        if (i + 1 == ts.size()) break;
        const Tensor eps_hat = loss::eps_from_v(x, v, t, schedule);
        x = loss::diffuse(x0_hat, eps_hat, std::vector<std::size_t>(n, ts[i + 1]), schedule);
    }
    return x0_hat;
}

Tensor sample(const Denoiser& model, const Adapter& adapter, const Tensor& z_latent, const NoiseSchedule& schedule,
              double guidance, std::size_t steps, std::uint64_t seed) {
    const nd::NoGradGuard no_grad;
    return sample_with_condition(model, eeg_condition(z_latent, adapter), schedule, guidance, steps, seed);
}

} // namespace eegdiff::diffusion
