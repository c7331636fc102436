#include <fstream>

#include "eegdiff/eval/metrics.hpp"
#include "eegdiff/train/pipeline.hpp"

namespace eegdiff::train {

void write_epoch_metrics(const std::filesystem::path& path, const std::vector<EpochMetric>& rows) {
    std::string text = "epoch,metric,value\n";
    for (const auto& r : rows) text += std::to_string(r.epoch) + "," + r.metric + "," + eval::format_double(r.value) + "\n";
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void check_dataset(const RunConfig& cfg, const signal::Dataset& ds) {
    const auto& d = ds.dims;
    auto expect = [](const char* name, std::size_t got, std::size_t want) {
        if (got != want) {
            throw TrainingError(std::string("dataset/config mismatch: ") + name + " is " + std::to_string(got) +
                                " in the dataset but " + std::to_string(want) + " in the config");
        }
    };
    expect("channels", d.channels, cfg.channels);
    expect("samples", d.samples, cfg.samples);
    expect("tokens", d.tokens, cfg.tokens);
    expect("width", d.width, cfg.width);
    expect("classes", d.classes, cfg.classes);
    expect("latent_channels", d.latent_channels, cfg.latent_channels);
    expect("latent_height", d.latent_height, cfg.latent_height);
    expect("latent_width", d.latent_width, cfg.latent_width);
}

nd::Tensor window_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items) {
    std::vector<double> v;
    v.reserve(items.size() * ds.dims.channels * ds.dims.samples);
    for (std::size_t i : items) {
        const auto& w = ds.windows.at(i).values;
        v.insert(v.end(), w.begin(), w.end());
    }
    return nd::Tensor::from({items.size(), ds.dims.channels, ds.dims.samples}, std::move(v));
}

nd::Tensor text_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items) {
    std::vector<double> v;
    for (std::size_t i : items) {
        const auto& t = ds.anchors.at(ds.windows.at(i).label).text;
        v.insert(v.end(), t.begin(), t.end());
    }
    return nd::Tensor::from({items.size(), ds.dims.tokens, ds.dims.width}, std::move(v));
}

nd::Tensor image_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items) {
    std::vector<double> v;
    for (std::size_t i : items) {
        const auto& im = ds.anchors.at(ds.windows.at(i).label).image;
        v.insert(v.end(), im.begin(), im.end());
    }
    return nd::Tensor::from({items.size(), ds.dims.width}, std::move(v));
}

nd::Tensor latent_batch(const signal::Dataset& ds, const std::vector<std::size_t>& items) {
    std::vector<double> v;
    for (std::size_t i : items) {
        const auto& l = ds.latents.at(i);
        v.insert(v.end(), l.begin(), l.end());
    }
    return nd::Tensor::from({items.size(), ds.dims.latent_channels, ds.dims.latent_height, ds.dims.latent_width},
                            std::move(v));
}

std::vector<std::size_t> item_labels(const signal::Dataset& ds, const std::vector<std::size_t>& items) {
    std::vector<std::size_t> labels;
    labels.reserve(items.size());
    for (std::size_t i : items) labels.push_back(ds.windows.at(i).label);
    return labels;
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& items, std::size_t size) {
    if (size == 0) throw std::invalid_argument("batch size must be positive");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < items.size(); start += size) {
        const std::size_t end = std::min(items.size(), start + size);
        out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(start),
                         items.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

const std::vector<std::size_t>& split_items(const signal::Dataset& ds, const std::string& split) {
    if (split == "train") return ds.splits.train;
    if (split == "val") return ds.splits.val;
    if (split == "test") return ds.splits.test;
    throw std::invalid_argument("unknown split \"" + split + "\"");
}

} // namespace eegdiff::train
