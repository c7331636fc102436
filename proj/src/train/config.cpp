#include "eegdiff/train/config.hpp"

#include <fstream>

namespace eegdiff::train {

namespace {

// One table drives both directions so the key sets cannot drift apart.
template <typename Config, typename Visitor>
void visit_fields(Config& c, Visitor&& v) {
    v("classes", c.classes);
    v("per_class", c.per_class);
    v("subjects", c.subjects);
    v("fs", c.fs);
    v("channels", c.channels);
    v("samples", c.samples);
    v("tokens", c.tokens);
    v("width", c.width);
    v("temporal_width", c.temporal_width);
    v("heads", c.heads);
    v("depth", c.depth);
    v("latent_channels", c.latent_channels);
    v("latent_height", c.latent_height);
    v("latent_width", c.latent_width);
    v("unet_level1", c.unet_level1);
    v("unet_level2", c.unet_level2);
    v("attention_width", c.attention_width);
    v("unet_heads", c.unet_heads);
    v("time_features", c.time_features);
    v("lambda_sdsc", c.weights.sdsc);
    v("lambda_mse", c.weights.mse);
    v("lambda_cos", c.weights.cos);
    v("lambda_recon", c.weights.recon);
    v("lambda_align", c.weights.align);
    v("lambda_con", c.weights.con);
    v("tau", c.weights.tau);
    v("diffusion_steps", c.diffusion_steps);
    v("beta_min", c.beta_min);
    v("beta_max", c.beta_max);
    v("gamma", c.gamma);
    v("gamma_base", c.gamma_base);
    v("lr_stage1", c.lr_stage1);
    v("lr_base", c.lr_base);
    v("lr_stage2", c.lr_stage2);
    v("beta1", c.beta1);
    v("beta2", c.beta2);
    v("adam_eps", c.adam_eps);
    v("epochs_stage1", c.epochs_stage1);
    v("epochs_base", c.epochs_base);
    v("epochs_stage2", c.epochs_stage2);
    v("max_steps_stage2", c.max_steps_stage2);
    v("batch_size", c.batch_size);
    v("seed", c.seed);
    v("drop_prob", c.drop_prob);
    v("drop_prob_base", c.drop_prob_base);
    v("guidance", c.guidance);
    v("sample_steps", c.sample_steps);
    v("num_samples", c.num_samples);
    v("sweep_scales", c.sweep_scales);
    v("eval_split", c.eval_split);
    v("data_dir", c.data_dir);
    v("encoder_checkpoint", c.encoder_checkpoint);
    v("diffusion_checkpoint", c.diffusion_checkpoint);
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError("config: " + message);
}

} // namespace

void RunConfig::validate() const {
    require(classes >= 2, "classes must be at least 2");
    require(per_class >= 2, "per_class must be at least 2");
    require(subjects >= 1, "subjects must be at least 1");
    require(batch_size >= 1, "batch_size must be positive");
    require(weights.con == 0.0 || batch_size >= 2, "batch_size must be at least 2 when lambda_con > 0");
    require(drop_prob >= 0.0 && drop_prob <= 1.0, "drop_prob must lie in [0, 1]");
    require(guidance >= 0.0, "guidance must be non-negative");
    require(drop_prob_base >= 0.0 && drop_prob_base <= 1.0, "drop_prob_base must lie in [0, 1]");
    require(gamma >= 0.0 && gamma_base >= 0.0, "gamma and gamma_base must be non-negative");
    require(sample_steps >= 1 && sample_steps <= diffusion_steps, "sample_steps must lie in [1, diffusion_steps]");
    require(num_samples >= 2, "num_samples must be at least 2");
    require(!sweep_scales.empty(), "sweep_scales must not be empty");
    for (double s : sweep_scales) require(s >= 0.0, "sweep scales must be non-negative");
    require(eval_split == "val" || eval_split == "test", "eval_split must be \"val\" or \"test\"");
    require(channels >= 2 && samples >= 2 && tokens >= 2 && width >= 2,
            "channels, samples, tokens and width must be at least 2");
    require(latent_channels >= 2 && latent_height >= 2 && latent_width >= 2, "latent dims must be at least 2");
    try {
        weights.validate();
        encoder().validate();
        denoiser().validate();
        adam(lr_stage1).validate();
        adam(lr_base).validate();
        adam(lr_stage2).validate();
        if (diffusion_steps < 2 || !(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
            throw std::invalid_argument("schedule needs diffusion_steps >= 2 and 0 < beta_min <= beta_max < 1");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

model::EncoderConfig RunConfig::encoder() const {
    model::EncoderConfig c;
    c.channels = channels;
    c.samples = samples;
    c.tokens = tokens;
    c.width = width;
    c.temporal_width = temporal_width;
    c.heads = heads;
    c.depth = depth;
    return c;
}

diffusion::DenoiserConfig RunConfig::denoiser() const {
    diffusion::DenoiserConfig c;
    c.latent_channels = latent_channels;
    c.height = latent_height;
    c.width = latent_width;
    c.level1 = unet_level1;
    c.level2 = unet_level2;
    c.attention_width = attention_width;
    c.heads = unet_heads;
    c.cond_tokens = tokens + diffusion::kAdapterTokens;
    c.cond_width = width;
    c.time_features = time_features;
    return c;
}

signal::SyntheticConfig RunConfig::synthetic() const {
    signal::SyntheticConfig c;
    c.dims.channels = channels;
    c.dims.samples = samples;
    c.dims.tokens = tokens;
    c.dims.width = width;
    c.dims.classes = classes;
    c.dims.subjects = subjects;
    c.dims.latent_channels = latent_channels;
    c.dims.latent_height = latent_height;
    c.dims.latent_width = latent_width;
    c.per_class = per_class;
    c.seed = seed;
    c.fs = fs;
    return c;
}

nd::AdamConfig RunConfig::adam(double lr) const {
    nd::AdamConfig c;
    c.lr = lr;
    c.beta1 = beta1;
    c.beta2 = beta2;
    c.eps = adam_eps;
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    visit_fields(*this, [&](const char* key, const auto& value) { j[key] = value; });
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    RunConfig c;
    std::size_t used = 0;
    visit_fields(c, [&](const char* key, auto& value) {
        const auto it = j.find(key);
        if (it == j.end()) return;
        ++used;
        try {
            using T = std::decay_t<decltype(value)>;
            if constexpr (std::is_unsigned_v<T>) {
                if (!it->is_number_unsigned()) throw ConfigError("");
            }
            it->get_to(value);
        } catch (const std::exception&) {
            throw ConfigError(std::string("config: key \"") + key + "\" has the wrong type");
        }
    });
    if (used != j.size()) {
        const nlohmann::json known = c.to_json();
        for (const auto& item : j.items()) {
            if (!known.contains(item.key())) throw ConfigError("config: unknown key \"" + item.key() + "\"");
        }
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

} // namespace eegdiff::train
