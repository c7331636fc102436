#include "eegdiff/train/cli.hpp"

#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "eegdiff/signal/container.hpp"
#include "eegdiff/train/pipeline.hpp"

namespace eegdiff::train {

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "run configuration (JSON)");
    cmd->add_option("--seed", opts.seed, "overrides the configured seed");
    cmd->add_option("--out", opts.out, "output directory")->required();
}

RunConfig resolve(const CommonOptions& opts) {
    RunConfig cfg = opts.config.empty() ? RunConfig{} : RunConfig::load(opts.config);
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.validate();
    return cfg;
}

signal::Dataset dataset_for(const RunConfig& cfg) {
    if (!std::filesystem::exists(std::filesystem::path(cfg.data_dir) / "manifest.json")) {
        throw TrainingError("no dataset in " + cfg.data_dir + "; run gen-data first");
    }
    signal::Dataset ds = signal::load_dataset(cfg.data_dir);
    check_dataset(cfg, ds);
    return ds;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << text;
        if (!f) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

nd::Tensor index_tensor(const std::vector<std::size_t>& v) {
    return nd::Tensor::from({v.size()}, std::vector<double>(v.begin(), v.end()));
}

std::string scale_name(double s) { return "s=" + eval::format_double(s); }

int gen_data(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const signal::Dataset ds = signal::gen_synthetic_dataset(cfg.synthetic());
    signal::save_dataset(out, ds);
    log << "wrote " << ds.windows.size() << " windows (" << ds.splits.train.size() << " train, "
        << ds.splits.val.size() << " val, " << ds.splits.test.size() << " test) to " << out.string() << "\n";
    return 0;
}

int stage1(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto r = train_stage1(cfg, dataset_for(cfg), out);
    log << "stage 1 done: val top1 " << r.final.top1 << ", top5 " << r.final.top5 << ", dice " << r.final.dice
        << ", mse " << r.final.mse << "\n";
    return 0;
}

int stage2(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto ds = dataset_for(cfg);
    const auto encoder = load_encoder(cfg, cfg.encoder_checkpoint);
    const auto r = train_stage2(cfg, ds, *encoder, out);
    log << "stage 2 done: " << r.steps << " steps over " << r.mask.size() << " trainable tensors, final v_loss "
        << (r.metrics.empty() ? 0.0 : r.metrics.back().value) << "\n";
    return 0;
}

int sample_cmd(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto ds = dataset_for(cfg);
    const auto encoder = load_encoder(cfg, cfg.encoder_checkpoint);
    const auto model = load_diffusion(cfg, cfg.diffusion_checkpoint);
    const Generation gen = generate(cfg, ds, *encoder, *model, cfg.guidance);
    signal::Container c;
    c.header = nlohmann::json{{"guidance", cfg.guidance}, {"seed", cfg.seed}, {"steps", cfg.sample_steps}}.dump();
    c.tensors.emplace("samples", gen.samples);
    c.tensors.emplace("labels", index_tensor(gen.labels));
    c.tensors.emplace("sources", index_tensor(gen.sources));
    signal::save_container(out / "samples.bin", c);
    log << "wrote " << gen.samples.dim(0) << " samples at guidance " << cfg.guidance << "\n";
    return 0;
}

int eval_retrieval(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto ds = dataset_for(cfg);
    const auto encoder = load_encoder(cfg, cfg.encoder_checkpoint);
    const auto& items = split_items(ds, cfg.eval_split);
    const auto rows = retrieval_report(*encoder, ds, items, cfg.batch_size);
    eval::write_metric_rows(out / "retrieval.csv", rows);
    const nd::Tensor pooled = model::mean_pool_latent(encode_items(*encoder, ds, items));
    eval::export_embeddings(out / "embeddings.csv", eval::Embeddings(pooled.dim(0), pooled.dim(1), pooled.to_vector()),
                            items, item_labels(ds, items));
    for (const auto& r : rows) log << r.metric << " " << r.scope << " " << r.mode << " K=" << r.k << ": " << r.value << "\n";
    return 0;
}

int eval_gen(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto ds = dataset_for(cfg);
    const auto encoder = load_encoder(cfg, cfg.encoder_checkpoint);
    const auto model = load_diffusion(cfg, cfg.diffusion_checkpoint);
    const auto scores = score_generation(generate(cfg, ds, *encoder, *model, cfg.guidance), ds);
    const std::string mode = scale_name(cfg.guidance);
    eval::write_metric_rows(out / "generation.csv", {{"class_agreement", cfg.eval_split, mode, 0, scores.class_agreement},
                                                     {"frechet_distance", cfg.eval_split, mode, 0, scores.frechet}});
    log << "guidance " << cfg.guidance << ": class agreement " << scores.class_agreement << ", frechet distance "
        << scores.frechet << "\n";
    return 0;
}

int grad_check_cmd(const std::filesystem::path& out, std::ostream& log) {
    const auto rows = gradient_suite(10);
    std::string text = "target,seed,max_relative_error\n";
    double worst = 0.0;
    for (const auto& r : rows) {
        text += r.target + "," + std::to_string(r.seed) + "," + eval::format_double(r.error) + "\n";
        worst = std::max(worst, r.error);
    }
    write_text(out / "grad_check.csv", text);
    log << rows.size() << " gradient checks, worst relative error " << worst << "\n";
    if (worst >= 1e-4) throw TrainingError("gradient check failed: worst relative error " + std::to_string(worst));
    return 0;
}

int cfg_sweep(const RunConfig& cfg, const std::vector<double>& scales, const std::filesystem::path& out,
              std::ostream& log) {
    for (double s : scales) {
        if (!(s >= 0.0)) throw ConfigError("guidance scales must be non-negative");
    }
    const auto ds = dataset_for(cfg);
    const auto encoder = load_encoder(cfg, cfg.encoder_checkpoint);
    const auto model = load_diffusion(cfg, cfg.diffusion_checkpoint);
    std::string text = "scale,class_agreement,frechet_distance\n";
    for (double s : scales) {
        const auto scores = score_generation(generate(cfg, ds, *encoder, *model, s), ds);
        text += eval::format_double(s) + "," + eval::format_double(scores.class_agreement) + "," +
                eval::format_double(scores.frechet) + "\n";
        log << "guidance " << s << ": class agreement " << scores.class_agreement << ", frechet distance "
            << scores.frechet << "\n";
    }
    write_text(out / "cfg_sweep.csv", text);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"EEG-conditioned toy latent diffusion: data, training and evaluation", "eegdiff"};
    app.require_subcommand(1, 1);

    struct Command {
        CLI::App* app;
        CommonOptions opts;
    };
    std::vector<std::unique_ptr<Command>> commands;
    auto add = [&](const char* name, const char* help) {
        auto c = std::make_unique<Command>();
        c->app = app.add_subcommand(name, help);
        add_common(c->app, c->opts);
        commands.push_back(std::move(c));
        return commands.back().get();
    };
    Command* gen = add("gen-data", "generate the synthetic dataset into --out");
    Command* s1 = add("train-stage1", "train the EEG autoencoder");
    Command* s2 = add("train-stage2", "finetune the diffusion model on a frozen encoder");
    Command* smp = add("sample", "generate latents at the configured guidance scale");
    Command* ret = add("eval-retrieval", "top-k retrieval on the evaluation split");
    Command* evg = add("eval-gen", "class agreement and Frechet distance of generated latents");
    Command* grd = add("grad-check", "finite-difference gradient suite");
    Command* swp = add("cfg-sweep", "eval-gen over a list of guidance scales");
    std::vector<double> scales;
    swp->app->add_option("--scales", scales, "guidance scales (default from config: 3,5,7,9)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    for (const auto& c : commands) {
        if (!c->app->parsed()) continue;
        try {
            const RunConfig cfg = resolve(c->opts);
            const std::filesystem::path dir(c->opts.out);
            std::filesystem::create_directories(dir);
            if (c.get() == gen) return gen_data(cfg, dir, out);
            if (c.get() == s1) return stage1(cfg, dir, out);
            if (c.get() == s2) return stage2(cfg, dir, out);
            if (c.get() == smp) return sample_cmd(cfg, dir, out);
            if (c.get() == ret) return eval_retrieval(cfg, dir, out);
            if (c.get() == evg) return eval_gen(cfg, dir, out);
            if (c.get() == grd) return grad_check_cmd(dir, out);
            if (c.get() == swp) return cfg_sweep(cfg, scales.empty() ? cfg.sweep_scales : scales, dir, out);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return 1;
        }
    }
    err << app.help();
    return 2;
}

} // namespace eegdiff::train
