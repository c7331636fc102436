#include <cmath>

#include <nlohmann/json.hpp>

#include "eegdiff/signal/container.hpp"
#include "eegdiff/train/pipeline.hpp"

namespace eegdiff::train {

namespace {

constexpr const char* kEncoderKeys[] = {"channels", "samples", "tokens", "width", "temporal_width", "heads", "depth"};

eval::Embeddings to_embeddings(const nd::Tensor& t) {
    return {t.dim(0), t.dim(1), t.to_vector()};
}

// The K class image embeddings; row c is class c and has id c.
eval::RetrievalIndex class_gallery(const signal::Dataset& ds) {
    eval::RetrievalIndex idx;
    std::vector<double> rows;
    for (const auto& a : ds.anchors) {
        rows.insert(rows.end(), a.image.begin(), a.image.end());
        idx.labels.push_back(a.label);
        idx.ids.push_back(a.label);
    }
    idx.embeddings = eval::Embeddings(ds.anchors.size(), ds.dims.width, std::move(rows));
    return idx;
}

} // namespace

Stage1Evaluation evaluate_stage1(const EncoderBundle& encoder, const signal::Dataset& ds,
                                 const std::vector<std::size_t>& items, const RunConfig& cfg) {
    if (items.empty()) throw TrainingError("stage 1 evaluation needs at least one item");
    if (encoder.model.training()) throw TrainingError("stage 1 evaluation expects an encoder in evaluation mode");
    const nd::NoGradGuard no_grad;
    const nd::Tensor e = window_batch(ds, items);
    const nd::Tensor z = encoder.model.encode(e);
    const nd::Tensor e_hat = encoder.model.decode(z);
    const nd::Tensor pooled = model::mean_pool_latent(z);
    const nd::Tensor text = text_batch(ds, items);
    const nd::Tensor image = image_batch(ds, items);

    Stage1Evaluation r;
    r.recon = loss::recon_loss(e, e_hat, cfg.weights).item();
    r.align = loss::text_align_loss(z, text, cfg.weights).item();
    r.contrastive = loss::contrastive_loss(pooled, image, cfg.weights.tau).item();
    r.loss = loss::stage1_loss(e, e_hat, z, text, pooled, image, cfg.weights).item();
    r.mse = loss::mse_loss(e, e_hat).item();
    r.dice = 1.0 - loss::sdsc_loss(e, e_hat).item();

    const auto labels = item_labels(ds, items);
    const eval::RetrievalQueries queries{to_embeddings(pooled), labels, labels};
    const auto gallery = class_gallery(ds);
    r.top1 = eval::topk_retrieval(queries, gallery, 1, eval::RetrievalMode::label, eval::RetrievalScope::global);
    r.top5 = gallery.embeddings.rows >= 5
                 ? eval::topk_retrieval(queries, gallery, 5, eval::RetrievalMode::label, eval::RetrievalScope::global)
                 : 1.0;
    return r;
}

Stage1Result train_stage1(const RunConfig& cfg, const signal::Dataset& ds, const std::filesystem::path& out) {
    cfg.validate();
    check_dataset(cfg, ds);
    if (ds.splits.train.empty() || ds.splits.val.empty()) throw TrainingError("stage 1 needs train and val items");
    std::filesystem::create_directories(out);

    nd::Rng rng(cfg.seed);
    EncoderBundle encoder(cfg.encoder(), rng);
    nd::Rng order_rng = rng.split();
    nd::Adam optimizer(cfg.adam(cfg.lr_stage1), encoder.store, encoder.store.parameter_names());

    Stage1Result result;
    auto record = [&](std::size_t epoch, const Stage1Evaluation& ev) {
        result.metrics.push_back({epoch, "val_loss", ev.loss});
        result.metrics.push_back({epoch, "val_recon", ev.recon});
        result.metrics.push_back({epoch, "val_align", ev.align});
        result.metrics.push_back({epoch, "val_contrastive", ev.contrastive});
        result.metrics.push_back({epoch, "val_mse", ev.mse});
        result.metrics.push_back({epoch, "val_dice", ev.dice});
        result.metrics.push_back({epoch, "val_top1", ev.top1});
        result.metrics.push_back({epoch, "val_top5", ev.top5});
    };
    result.initial = evaluate_stage1(encoder, ds, ds.splits.val, cfg);
    record(0, result.initial);

    for (std::size_t epoch = 1; epoch <= cfg.epochs_stage1; ++epoch) {
        std::vector<std::size_t> order = ds.splits.train;
        order_rng.shuffle(order);
        encoder.model.set_training(true);
        double total = 0.0;
        const auto batches = make_batches(order, cfg.batch_size);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& items = batches[b];
            auto diverged = [&](const std::string& what) {
                return TrainingError("stage 1: non-finite loss (" + what + ") at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(b) + "; lower lr_stage1 or check the input scale");
            };
            const nd::Tensor e = window_batch(ds, items);
            nd::Tensor l;
            try {
                const nd::Tensor z = encoder.model.encode(e);
                const nd::Tensor e_hat = encoder.model.decode(z);
                l = loss::stage1_loss(e, e_hat, z, text_batch(ds, items), model::mean_pool_latent(z),
                                      image_batch(ds, items), cfg.weights);
            } catch (const nd::DomainError& err) {
                throw diverged(err.what());
            }
            const double value = l.item();
            if (!std::isfinite(value)) throw diverged(std::to_string(value));
            optimizer.step(nd::backward(l));
            total += value;
        }
        encoder.model.set_training(false);
        result.metrics.push_back({epoch, "train_loss", total / static_cast<double>(batches.size())});
        result.final = evaluate_stage1(encoder, ds, ds.splits.val, cfg);
        record(epoch, result.final);
    }
    if (cfg.epochs_stage1 == 0) result.final = result.initial;

    nlohmann::json header{{"kind", "encoder"}, {"epochs", cfg.epochs_stage1}, {"config", cfg.to_json()}};
    signal::save_checkpoint(out / "encoder.ckpt", encoder.store.entries(), header.dump());
    write_epoch_metrics(out / "stage1_metrics.csv", result.metrics);
    return result;
}

std::unique_ptr<EncoderBundle> load_encoder(const RunConfig& cfg, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw TrainingError("encoder checkpoint " + path.string() + " does not exist");
    const signal::Container ckpt = signal::load_checkpoint(path);
    const auto header = nlohmann::json::parse(ckpt.header, nullptr, false);
    if (header.is_discarded() || header.value("kind", "") != "encoder" || !header.contains("config")) {
        throw TrainingError(path.string() + " is not an encoder checkpoint");
    }
    const nlohmann::json want = cfg.to_json();
    for (const char* key : kEncoderKeys) {
        if (header["config"].value(key, nlohmann::json()) != want[key]) {
            throw TrainingError("checkpoint/config mismatch: " + std::string(key) + " is " +
                                header["config"].value(key, nlohmann::json()).dump() + " in " + path.string() +
                                " but " + want[key].dump() + " in the config");
        }
    }
    nd::Rng rng(0);
    auto bundle = std::make_unique<EncoderBundle>(cfg.encoder(), rng);
    bundle->store.assign(ckpt.tensors);
    bundle->store.set_requires_grad(false);
    return bundle;
}

nd::Tensor encode_items(const EncoderBundle& encoder, const signal::Dataset& ds, const std::vector<std::size_t>& items) {
    const nd::NoGradGuard no_grad;
    if (encoder.model.training()) throw TrainingError("encode_items expects an encoder in evaluation mode");
    return encoder.model.encode(window_batch(ds, items));
}

std::vector<eval::MetricRow> retrieval_report(const EncoderBundle& encoder, const signal::Dataset& ds,
                                              const std::vector<std::size_t>& items, std::size_t batch_size) {
    const auto labels = item_labels(ds, items);
    const eval::Embeddings pooled = to_embeddings(model::mean_pool_latent(encode_items(encoder, ds, items)));
    const auto gallery = class_gallery(ds);
    const eval::RetrievalQueries global_queries{pooled, labels, labels};

    // local: the gallery holds each item's paired image, keyed by item id
    eval::RetrievalIndex paired;
    paired.embeddings = to_embeddings(image_batch(ds, items));
    paired.labels = labels;
    paired.ids = items;
    const eval::RetrievalQueries local_queries{pooled, labels, items};
    const auto batches = eval::contiguous_batches(items.size(), batch_size);
    std::size_t smallest = items.size();
    for (const auto& b : batches) smallest = std::min(smallest, b.size());

    std::vector<eval::MetricRow> rows;
    for (auto mode : {eval::RetrievalMode::label, eval::RetrievalMode::image}) {
        for (std::size_t k : {1, 5}) {
            if (k <= gallery.embeddings.rows) {
                rows.push_back({"topk", "global", eval::mode_name(mode), k,
                                eval::topk_retrieval(global_queries, gallery, k, mode, eval::RetrievalScope::global)});
            }
            if (k <= smallest) {
                rows.push_back({"topk", "local", eval::mode_name(mode), k,
                                eval::topk_retrieval(local_queries, paired, k, mode, eval::RetrievalScope::local,
                                                     batches)});
            }
        }
    }
    return rows;
}

} // namespace eegdiff::train
