#include "eegdiff/signal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "eegdiff/nd/random.hpp"
#include "eegdiff/signal/container.hpp"

namespace eegdiff::signal {

namespace {

using nlohmann::json;

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kDataName = "dataset.bin";
constexpr std::size_t kAnchorAttempts = 100000;

struct Component {
    double freq = 0.0;
    std::vector<double> amplitude; // per channel
    std::vector<double> phase;     // per channel
};

void validate(const SyntheticConfig& cfg) {
    const DatasetDims& d = cfg.dims;
    if (d.classes < 2) throw std::invalid_argument("gen_synthetic_dataset: need at least 2 classes");
    if (cfg.per_class < 2) throw std::invalid_argument("gen_synthetic_dataset: need at least 2 items per class");
    for (std::size_t v : {d.channels, d.samples, d.tokens, d.width, d.latent_channels, d.latent_height,
                          d.latent_width}) {
        if (v < 2) throw std::invalid_argument("gen_synthetic_dataset: every dimension must be at least 2");
    }
    if (d.subjects < 1) throw std::invalid_argument("gen_synthetic_dataset: need at least 1 subject");
    if (d.classes > 4 * d.channels) {
        throw std::invalid_argument("gen_synthetic_dataset: " + std::to_string(d.classes) +
                                    " classes cannot be separated with " + std::to_string(d.channels) +
                                    " channels (limit 4 per channel)");
    }
    const SplitRatios& r = cfg.ratios;
    if (r.train <= 0.0 || r.val < 0.0 || r.test < 0.0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
        throw std::invalid_argument("gen_synthetic_dataset: split ratios must be non-negative and sum to 1");
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> unit_vector(nd::Rng& rng, std::size_t n) {
    std::vector<double> v = rng.normal_vector(n);
    const double norm = std::sqrt(dot(v, v));
    for (auto& x : v) x /= norm;
    return v;
}

std::vector<SemanticAnchor> make_anchors(const SyntheticConfig& cfg, nd::Rng& rng) {
    const std::size_t K = cfg.dims.classes, T = cfg.dims.tokens, D = cfg.dims.width;
    std::vector<SemanticAnchor> anchors;
    for (std::size_t k = 0; k < K; ++k) {
        SemanticAnchor a;
        a.label = k;
        std::size_t attempt = 0;
        for (;; ++attempt) {
            if (attempt == kAnchorAttempts) {
                throw std::runtime_error("gen_synthetic_dataset: could not place " + std::to_string(K) +
                                         " anchors in " + std::to_string(D) + " dimensions with |cos| <= " +
                                         std::to_string(cfg.anchor_ceiling));
            }
            a.image = unit_vector(rng, D);
            const bool ok = std::all_of(anchors.begin(), anchors.end(), [&](const SemanticAnchor& other) {
                return std::abs(dot(a.image, other.image)) <= cfg.anchor_ceiling;
            });
            if (ok) break;
        }
        a.text.resize(T * D);
        const double spread = cfg.text_spread / std::sqrt(static_cast<double>(D));
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t j = 0; j < D; ++j) a.text[t * D + j] = a.image[j] + spread * rng.normal();
        }
        anchors.push_back(std::move(a));
    }
    return anchors;
}

std::vector<std::vector<Component>> make_class_signatures(const SyntheticConfig& cfg, nd::Rng& rng) {
    const std::size_t C = cfg.dims.channels;
    // Keep every component clear of the filter skirts.
    const double f_lo = cfg.band_lo + 3.0, f_hi = cfg.band_hi - 5.0;
    std::vector<std::vector<Component>> classes(cfg.dims.classes);
    for (auto& comps : classes) {
        for (std::size_t i = 0; i < cfg.components_per_class; ++i) {
            Component c;
            c.freq = rng.uniform(f_lo, f_hi);
            for (std::size_t ch = 0; ch < C; ++ch) {
                c.amplitude.push_back(cfg.amplitude * rng.uniform(0.5, 1.5));
                c.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
            }
            comps.push_back(std::move(c));
        }
    }
    return classes;
}

json dims_json(const DatasetDims& d) {
    return {{"channels", d.channels},       {"samples", d.samples},
            {"tokens", d.tokens},           {"width", d.width},
            {"classes", d.classes},         {"subjects", d.subjects},
            {"latent_channels", d.latent_channels}, {"latent_height", d.latent_height},
            {"latent_width", d.latent_width}};
}

DatasetDims dims_from_json(const json& j) {
    DatasetDims d;
    d.channels = j.at("channels");
    d.samples = j.at("samples");
    d.tokens = j.at("tokens");
    d.width = j.at("width");
    d.classes = j.at("classes");
    d.subjects = j.at("subjects");
    d.latent_channels = j.at("latent_channels");
    d.latent_height = j.at("latent_height");
    d.latent_width = j.at("latent_width");
    return d;
}

const nd::Tensor& record(const Container& c, const std::string& name, const nd::Shape& shape) {
    auto it = c.tensors.find(name);
    if (it == c.tensors.end()) throw FormatError("dataset is missing record '" + name + "'");
    if (it->second.shape() != shape) {
        throw FormatError("dataset record '" + name + "' has shape " + nd::shape_str(it->second.shape()) +
                          ", manifest implies " + nd::shape_str(shape));
    }
    return it->second;
}

} // namespace

Splits stratified_split(const std::vector<std::size_t>& labels, std::size_t classes, const SplitRatios& ratios,
                        std::uint64_t seed) {
    nd::Rng rng(seed);
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(labels[i]).push_back(i);
    Splits s;
    for (auto& items : by_class) {
        rng.shuffle(items);
        const auto n = static_cast<double>(items.size());
        const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
        const auto n_val = std::min(items.size() - n_train, static_cast<std::size_t>(std::llround(ratios.val * n)));
        s.train.insert(s.train.end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.val.insert(s.val.end(), items.begin() + static_cast<std::ptrdiff_t>(n_train),
                     items.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        s.test.insert(s.test.end(), items.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), items.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

Dataset gen_synthetic_dataset(const SyntheticConfig& cfg) {
    validate(cfg);
    const DatasetDims& d = cfg.dims;
    nd::Rng root(cfg.seed);
    nd::Rng anchor_rng = root.split();
    nd::Rng signal_rng = root.split();
    nd::Rng latent_rng = root.split();
    const std::uint64_t split_seed = root.split().index(std::size_t{1} << 62);

    Dataset ds;
    ds.dims = d;
    ds.seed = cfg.seed;
    ds.per_class = cfg.per_class;
    ds.ratios = cfg.ratios;
    ds.fs = cfg.fs;
    ds.anchors = make_anchors(cfg, anchor_rng);

    const auto signatures = make_class_signatures(cfg, signal_rng);
    std::vector<std::vector<double>> subject_gain(d.subjects), subject_phase(d.subjects);
    for (std::size_t m = 0; m < d.subjects; ++m) {
        for (std::size_t c = 0; c < d.channels; ++c) {
            subject_gain[m].push_back(signal_rng.uniform(0.8, 1.2));
            subject_phase[m].push_back(signal_rng.uniform(-std::numbers::pi / 8, std::numbers::pi / 8));
        }
    }

    PreprocessConfig pre;
    pre.fs = cfg.fs;
    pre.lo = cfg.band_lo;
    pre.hi = cfg.band_hi;
    pre.target_length = d.samples;
    const std::size_t raw_len = discard_count(pre) + d.samples;

    const std::size_t total = d.classes * cfg.per_class;
    std::vector<std::size_t> labels(total);
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t label = i / cfg.per_class;
        const std::size_t subject = signal_rng.index(d.subjects);
        labels[i] = label;
        std::vector<double> raw(d.channels * raw_len);
        for (std::size_t c = 0; c < d.channels; ++c) {
            for (std::size_t t = 0; t < raw_len; ++t) {
                double v = 0.0;
                for (const Component& comp : signatures[label]) {
                    v += comp.amplitude[c] * std::sin(2.0 * std::numbers::pi * comp.freq * static_cast<double>(t) /
                                                          cfg.fs +
                                                      comp.phase[c] + subject_phase[subject][c]);
                }
                raw[c * raw_len + t] = subject_gain[subject][c] * v + cfg.noise * signal_rng.normal();
            }
        }
        EegWindow w = preprocess(raw, d.channels, pre);
        w.label = label;
        w.subject = subject;
        ds.windows.push_back(std::move(w));
    }

    for (std::size_t k = 0; k < d.classes; ++k) ds.anchor_latents.push_back(latent_rng.normal_vector(d.latent_size()));
    for (std::size_t i = 0; i < total; ++i) {
        std::vector<double> z = latent_rng.normal_vector(d.latent_size(), cfg.latent_jitter);
        const auto& anchor = ds.anchor_latents[labels[i]];
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += anchor[j];
        ds.latents.push_back(std::move(z));
    }

    ds.splits = stratified_split(labels, d.classes, cfg.ratios, split_seed);
    return ds;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    const DatasetDims& d = ds.dims;
    const std::size_t n = ds.windows.size();
    std::filesystem::create_directories(dir);

    Container c;
    std::vector<double> windows, labels, subjects, text, image, anchor_lat, lat;
    for (const auto& w : ds.windows) {
        windows.insert(windows.end(), w.values.begin(), w.values.end());
        labels.push_back(static_cast<double>(w.label));
        subjects.push_back(static_cast<double>(w.subject));
    }
    for (const auto& a : ds.anchors) {
        text.insert(text.end(), a.text.begin(), a.text.end());
        image.insert(image.end(), a.image.begin(), a.image.end());
    }
    for (const auto& z : ds.anchor_latents) anchor_lat.insert(anchor_lat.end(), z.begin(), z.end());
    for (const auto& z : ds.latents) lat.insert(lat.end(), z.begin(), z.end());
    const nd::Shape latent_tail{d.latent_channels, d.latent_height, d.latent_width};
    auto with_lead = [&](std::size_t lead) {
        nd::Shape s{lead};
        s.insert(s.end(), latent_tail.begin(), latent_tail.end());
        return s;
    };
    c.tensors.emplace("windows", nd::Tensor::from({n, d.channels, d.samples}, std::move(windows)));
    c.tensors.emplace("labels", nd::Tensor::from({n}, std::move(labels)));
    c.tensors.emplace("subjects", nd::Tensor::from({n}, std::move(subjects)));
    c.tensors.emplace("anchors.text", nd::Tensor::from({d.classes, d.tokens, d.width}, std::move(text)));
    c.tensors.emplace("anchors.image", nd::Tensor::from({d.classes, d.width}, std::move(image)));
    c.tensors.emplace("latents.anchor", nd::Tensor::from(with_lead(d.classes), std::move(anchor_lat)));
    c.tensors.emplace("latents.target", nd::Tensor::from(with_lead(n), std::move(lat)));
    c.header = json{{"kind", "dataset"}}.dump();
    const auto offsets = save_container(dir / kDataName, c);

    json records = json::array();
    for (const auto& r : offsets) {
        records.push_back({{"name", r.name}, {"shape", c.tensors.at(r.name).shape()}, {"offset", r.offset}});
    }
    const json manifest = {
        {"format", "eegdiff-dataset"},
        {"version", 1},
        {"dims", dims_json(d)},
        {"sampling_rate", ds.fs},
        {"seed", ds.seed},
        {"per_class", ds.per_class},
        {"ratios", {ds.ratios.train, ds.ratios.val, ds.ratios.test}},
        {"counts",
         {{"train", ds.splits.train.size()},
          {"val", ds.splits.val.size()},
          {"test", ds.splits.test.size()},
          {"total", n}}},
        {"splits", {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}}},
        {"data_file", kDataName},
        {"records", records},
    };
    const std::filesystem::path tmp = dir / (std::string(kManifestName) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << manifest.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, dir / kManifestName);
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / kManifestName);
    if (!in) throw std::runtime_error("cannot open " + (dir / kManifestName).string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest: " + std::string(e.what()));
    }
    if (m.value("format", "") != "eegdiff-dataset") throw FormatError("manifest is not an eegdiff dataset");

    Dataset ds;
    ds.dims = dims_from_json(m.at("dims"));
    ds.fs = m.at("sampling_rate");
    ds.seed = m.at("seed");
    ds.per_class = m.at("per_class");
    const auto& r = m.at("ratios");
    ds.ratios = {r.at(0), r.at(1), r.at(2)};
    ds.splits.train = m.at("splits").at("train").get<std::vector<std::size_t>>();
    ds.splits.val = m.at("splits").at("val").get<std::vector<std::size_t>>();
    ds.splits.test = m.at("splits").at("test").get<std::vector<std::size_t>>();
    const std::size_t n = m.at("counts").at("total");

    const DatasetDims& d = ds.dims;
    const Container c = load_container(dir / m.at("data_file").get<std::string>());
    const auto windows = record(c, "windows", {n, d.channels, d.samples}).data();
    const auto labels = record(c, "labels", {n}).data();
    const auto subjects = record(c, "subjects", {n}).data();
    const auto text = record(c, "anchors.text", {d.classes, d.tokens, d.width}).data();
    const auto image = record(c, "anchors.image", {d.classes, d.width}).data();
    const auto anchor_lat = record(c, "latents.anchor", {d.classes, d.latent_channels, d.latent_height,
                                                         d.latent_width}).data();
    const auto lat = record(c, "latents.target", {n, d.latent_channels, d.latent_height, d.latent_width}).data();

    const std::size_t cs = d.channels * d.samples, td = d.tokens * d.width, L = d.latent_size();
    for (std::size_t i = 0; i < n; ++i) {
        EegWindow w;
        w.channels = d.channels;
        w.samples = d.samples;
        w.values.assign(windows.begin() + static_cast<std::ptrdiff_t>(i * cs),
                        windows.begin() + static_cast<std::ptrdiff_t>((i + 1) * cs));
        w.label = static_cast<std::size_t>(labels[i]);
        w.subject = static_cast<std::size_t>(subjects[i]);
        ds.windows.push_back(std::move(w));
        ds.latents.emplace_back(lat.begin() + static_cast<std::ptrdiff_t>(i * L),
                                lat.begin() + static_cast<std::ptrdiff_t>((i + 1) * L));
    }
    for (std::size_t k = 0; k < d.classes; ++k) {
        SemanticAnchor a;
        a.label = k;
        a.text.assign(text.begin() + static_cast<std::ptrdiff_t>(k * td),
                      text.begin() + static_cast<std::ptrdiff_t>((k + 1) * td));
        a.image.assign(image.begin() + static_cast<std::ptrdiff_t>(k * d.width),
                       image.begin() + static_cast<std::ptrdiff_t>((k + 1) * d.width));
        ds.anchors.push_back(std::move(a));
        ds.anchor_latents.emplace_back(anchor_lat.begin() + static_cast<std::ptrdiff_t>(k * L),
                                       anchor_lat.begin() + static_cast<std::ptrdiff_t>((k + 1) * L));
    }
    const std::size_t split_total = ds.splits.train.size() + ds.splits.val.size() + ds.splits.test.size();
    if (split_total != n) throw FormatError("manifest splits do not cover the dataset");
    return ds;
}

} // namespace eegdiff::signal
