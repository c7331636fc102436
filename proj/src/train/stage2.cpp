#include <cmath>

#include <nlohmann/json.hpp>

#include "eegdiff/signal/container.hpp"
#include "eegdiff/train/pipeline.hpp"

namespace eegdiff::train {

namespace {

constexpr const char* kDiffusionKeys[] = {"latent_channels", "latent_height", "latent_width", "unet_level1",
                                          "unet_level2", "attention_width", "unet_heads", "time_features",
                                          "tokens", "width"};

std::size_t count_changed(const std::map<std::string, std::vector<double>>& before, const nd::ParamStore& store,
                          const diffusion::TrainMask* skip = nullptr) {
    std::size_t changed = 0;
    for (const auto& [name, values] : before) {
        if (skip && skip->contains(name)) continue;
        changed += store.at(name).to_vector() != values;
    }
    return changed;
}

// Rows of a (N, ...) tensor indexed by dataset item id.
nd::Tensor gather_rows(const nd::Tensor& all, const std::vector<std::size_t>& items) {
    const std::size_t row = all.size() / all.dim(0);
    const auto data = all.data();
    std::vector<double> v;
    v.reserve(items.size() * row);
    for (std::size_t i : items) v.insert(v.end(), data.begin() + static_cast<std::ptrdiff_t>(i * row),
                                         data.begin() + static_cast<std::ptrdiff_t>((i + 1) * row));
    nd::Shape shape = all.shape();
    shape[0] = items.size();
    return nd::Tensor::from(shape, std::move(v));
}

std::vector<std::size_t> all_items(const signal::Dataset& ds) {
    std::vector<std::size_t> items(ds.windows.size());
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
    return items;
}

void check_loss(double value, const char* phase, std::size_t epoch) {
    if (!std::isfinite(value)) {
        throw TrainingError(std::string(phase) + ": non-finite v_loss " + std::to_string(value) + " at epoch " +
                            std::to_string(epoch));
    }
}

} // namespace

Stage2Result train_stage2(const RunConfig& cfg, const signal::Dataset& ds, const EncoderBundle& encoder,
                          const std::filesystem::path& out) {
    cfg.validate();
    check_dataset(cfg, ds);
    if (ds.splits.train.empty()) throw TrainingError("stage 2 needs train items");
    std::filesystem::create_directories(out);

    const auto encoder_before = encoder.store.snapshot();
    const nd::Tensor z_all = encode_items(encoder, ds, all_items(ds));
    const auto schedule = diffusion::build_schedule(cfg.diffusion_steps, cfg.beta_min, cfg.beta_max);

    nd::Rng rng(cfg.seed);
    DiffusionBundle model(cfg, rng);
    nd::Rng step_rng = rng.split();
    Stage2Result result;

    const auto base_mask = diffusion::TrainMask::with_prefix(model.store, "unet.");
    base_mask.apply(model.store);
    nd::Adam base_opt(cfg.adam(cfg.lr_base), model.store, base_mask.names());
    for (std::size_t epoch = 1; epoch <= cfg.epochs_base; ++epoch) {
        std::vector<std::size_t> order = ds.splits.train;
        step_rng.shuffle(order);
        double total = 0.0;
        const auto batches = make_batches(order, cfg.batch_size);
        for (const auto& items : batches) {
            const diffusion::DiffusionBatch batch{latent_batch(ds, items), text_batch(ds, items)};
            total += diffusion::base_train_step(batch, model.denoiser, cfg.drop_prob_base, base_opt, schedule,
                                                step_rng, cfg.gamma_base);
        }
        check_loss(total, "base phase", epoch);
        result.metrics.push_back({epoch, "base_v_loss", total / static_cast<double>(batches.size())});
    }

    const auto mask = diffusion::TrainMask::selective(model.store);
    mask.apply(model.store);
    result.mask = mask.names();
    const auto diffusion_before = model.store.snapshot();
    nd::Adam optimizer(cfg.adam(cfg.lr_stage2), model.store, mask.names());
    for (std::size_t epoch = 1; epoch <= cfg.epochs_stage2; ++epoch) {
        if (cfg.max_steps_stage2 != 0 && result.steps >= cfg.max_steps_stage2) break;
        std::vector<std::size_t> order = ds.splits.train;
        step_rng.shuffle(order);
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& items : make_batches(order, cfg.batch_size)) {
            if (cfg.max_steps_stage2 != 0 && result.steps >= cfg.max_steps_stage2) break;
            const diffusion::DiffusionBatch batch{latent_batch(ds, items), gather_rows(z_all, items)};
            const double value = diffusion::stage2_train_step(batch, model.denoiser, model.adapter, mask,
                                                              cfg.drop_prob, optimizer, schedule, step_rng, cfg.gamma);
            check_loss(value, "stage 2", epoch);
            result.step_losses.push_back(value);
            total += value;
            ++count;
            ++result.steps;
        }
        result.metrics.push_back({epoch, "v_loss", total / static_cast<double>(count)});
    }

    result.frozen_changed = count_changed(diffusion_before, model.store, &mask);
    result.encoder_changed = count_changed(encoder_before, encoder.store);
    if (result.frozen_changed != 0 || result.encoder_changed != 0) {
        throw TrainingError("stage 2 freeze audit failed: " + std::to_string(result.frozen_changed) +
                            " frozen diffusion tensors and " + std::to_string(result.encoder_changed) +
                            " encoder tensors changed");
    }

    nlohmann::json header{{"kind", "diffusion"},
                          {"base_epochs", cfg.epochs_base},
                          {"steps", result.steps},
                          {"mask", result.mask},
                          {"config", cfg.to_json()}};
    signal::save_checkpoint(out / "diffusion.ckpt", model.store.entries(), header.dump());
    write_epoch_metrics(out / "stage2_metrics.csv", result.metrics);
    return result;
}

std::unique_ptr<DiffusionBundle> load_diffusion(const RunConfig& cfg, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw TrainingError("diffusion checkpoint " + path.string() + " does not exist");
    const signal::Container ckpt = signal::load_checkpoint(path);
    const auto header = nlohmann::json::parse(ckpt.header, nullptr, false);
    if (header.is_discarded() || header.value("kind", "") != "diffusion" || !header.contains("config")) {
        throw TrainingError(path.string() + " is not a diffusion checkpoint");
    }
    const nlohmann::json want = cfg.to_json();
    for (const char* key : kDiffusionKeys) {
        if (header["config"].value(key, nlohmann::json()) != want[key]) {
            throw TrainingError("checkpoint/config mismatch: " + std::string(key) + " is " +
                                header["config"].value(key, nlohmann::json()).dump() + " in " + path.string() +
                                " but " + want[key].dump() + " in the config");
        }
    }
    nd::Rng rng(0);
    auto bundle = std::make_unique<DiffusionBundle>(cfg, rng);
    bundle->store.assign(ckpt.tensors);
    bundle->store.set_requires_grad(false);
    return bundle;
}

Generation generate(const RunConfig& cfg, const signal::Dataset& ds, const EncoderBundle& encoder,
                    const DiffusionBundle& diffusion, double guidance) {
    const auto& pool = split_items(ds, cfg.eval_split);
    if (pool.empty()) throw TrainingError("the " + cfg.eval_split + " split is empty");
    Generation gen;
    for (std::size_t i = 0; i < cfg.num_samples; ++i) gen.sources.push_back(pool[i % pool.size()]);
    gen.labels = item_labels(ds, gen.sources);
    const auto schedule = diffusion::build_schedule(cfg.diffusion_steps, cfg.beta_min, cfg.beta_max);
    gen.samples = diffusion::sample(diffusion.denoiser, diffusion.adapter, encode_items(encoder, ds, gen.sources),
                                    schedule, guidance, cfg.sample_steps, cfg.seed);
    return gen;
}

GenerationScores score_generation(const Generation& gen, const signal::Dataset& ds) {
    const std::size_t n = gen.samples.dim(0), len = gen.samples.size() / n;
    const eval::Embeddings generated(n, len, gen.samples.to_vector());
    std::vector<double> anchors, real;
    for (const auto& a : ds.anchor_latents) anchors.insert(anchors.end(), a.begin(), a.end());
    for (const auto& l : ds.latents) real.insert(real.end(), l.begin(), l.end());
    GenerationScores s;
    s.class_agreement =
        eval::class_agreement(generated, gen.labels, eval::Embeddings(ds.anchor_latents.size(), len, anchors));
    s.frechet = eval::frechet_distance(eval::GaussianStats::fit(generated),
                                       eval::GaussianStats::fit(eval::Embeddings(ds.latents.size(), len, real)));
    return s;
}

} // namespace eegdiff::train
