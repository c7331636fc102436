// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failures.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "eegdiff/diffusion/adapter.hpp"
#include "eegdiff/eval/metrics.hpp"
#include "eegdiff/loss/losses.hpp"
#include "eegdiff/model/encoder.hpp"
#include "eegdiff/signal/container.hpp"
#include "eegdiff/signal/dataset.hpp"
#include "eegdiff/signal/preprocess.hpp"
#include "eegdiff/train/cli.hpp"
#include "eegdiff/train/pipeline.hpp"

using namespace eegdiff;
using nd::Tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void run(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    failures += !o.pass;
    std::printf("%s criterion %2d %s:%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
}

std::filesystem::path work_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "eegdiff_acceptance" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> tree(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[std::filesystem::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in),
                                                                     std::istreambuf_iterator<char>()};
    }
    return files;
}

// ---- independent oracles ----

// Cyclic Jacobi eigenvalues of a symmetric matrix.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    return ev;
}

// ||mu_a - mu_b||^2 + tr(Sa) + tr(Sb) - 2 tr sqrt(L^T Sb L), Sa = L L^T.
double frechet_oracle(const std::vector<double>& ma, const std::vector<std::vector<double>>& sa,
                      const std::vector<double>& mb, const std::vector<std::vector<double>>& sb) {
    const std::size_t n = ma.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = sa[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
        }
    }
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = 0; q < n; ++q) m[i][j] += l[p][i] * sb[p][q] * l[q][j];
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (ma[i] - mb[i]) * (ma[i] - mb[i]) + sa[i][i] + sb[i][i];
    for (double ev : jacobi_eigenvalues(m)) d -= 2.0 * std::sqrt(std::max(ev, 0.0));
    return d;
}

// Zero-phase mask applied through a direct O(n^2) DFT.
std::vector<double> dft_bandpass(const std::vector<double>& x, double fs, double lo, double hi, double transition) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> spec(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            spec[k] += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j % n) / double(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double f = fs * double(std::min(k, n - k)) / double(n);
        double g = 0.0;
        if (f >= lo && f <= hi) g = 1.0;
        else if (f < lo && f > lo - transition) g = 0.5 * (1.0 + std::cos(std::numbers::pi * (lo - f) / transition));
        else if (f > hi && f < hi + transition) g = 0.5 * (1.0 + std::cos(std::numbers::pi * (f - hi) / transition));
        spec[k] *= g;
    }
    std::vector<double> y(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::complex<double> s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += spec[k] * std::polar(1.0, 2.0 * std::numbers::pi * double(k * j % n) / double(n));
        y[j] = s.real() / double(n);
    }
    return y;
}

double rms(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / double(x.size()));
}

std::vector<std::size_t> random_steps(nd::Rng& rng, std::size_t n, std::size_t steps) {
    std::vector<std::size_t> t(n);
    for (auto& v : t) v = rng.index(steps);
    return t;
}

train::RunConfig tiny_config() {
    train::RunConfig c;
    c.classes = 4;
    c.per_class = 10;
    c.subjects = 2;
    c.channels = 4;
    c.samples = 16;
    c.tokens = 2;
    c.width = 8;
    c.temporal_width = 8;
    c.heads = 2;
    c.depth = 1;
    c.latent_channels = 2;
    c.latent_height = 4;
    c.latent_width = 4;
    c.unet_level1 = 8;
    c.unet_level2 = 8;
    c.attention_width = 8;
    c.unet_heads = 2;
    c.time_features = 8;
    c.diffusion_steps = 100;
    c.epochs_stage1 = 3;
    c.epochs_base = 2;
    c.epochs_stage2 = 2;
    c.batch_size = 8;
    c.sample_steps = 5;
    c.num_samples = 8;
    c.sweep_scales = {1.0, 3.0};
    return c;
}

} // namespace

int main() {
    run(1, "gradient suite", [](Outcome& o) {
        const auto start = Clock::now();
        const auto rows = train::gradient_suite(10);
        const double elapsed = seconds_since(start);
        std::map<std::string, double> worst;
        for (const auto& r : rows) worst[r.target] = std::max(worst[r.target], r.error);
        for (const auto& [target, err] : worst) {
            o.detail << " " << target << "=" << err;
            o.require(err < 1e-4, target + " error " + std::to_string(err));
        }
        o.require(worst.size() == 9 && rows.size() == 90, "9 targets x 10 seeds");
        o.detail << " time=" << elapsed << "s";
        o.require(elapsed < 120.0, "runtime under 2 min");
    });

    run(2, "loss identities", [](Outcome& o) {
        nd::Rng rng(2);
        double sdsc_asym = 0.0, sdsc_min = 1.0, sdsc_max = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const Tensor a = rng.normal_tensor({3, 5, 7}, 1.0 + trial % 4);
            const Tensor b = rng.normal_tensor({3, 5, 7});
            const double ab = loss::sdsc_loss(a, b).item(), ba = loss::sdsc_loss(b, a).item();
            sdsc_asym = std::max(sdsc_asym, std::abs(ab - ba));
            for (double v : {ab, loss::sdsc_loss(a, a).item(), loss::sdsc_loss(a, nd::scalar_mul(a, -1.0)).item()}) {
                sdsc_min = std::min(sdsc_min, v);
                sdsc_max = std::max(sdsc_max, v);
            }
        }
        o.detail << " sdsc_asym=" << sdsc_asym << " sdsc_range=[" << sdsc_min << "," << sdsc_max << "]";
        o.require(sdsc_asym == 0.0, "sdsc symmetric");
        o.require(sdsc_min >= 0.0 && sdsc_max <= 1.0, "sdsc in [0,1]");

        double con_err = 0.0;
        for (std::size_t n : {2, 5, 16, 64}) {
            const Tensor row = rng.normal_tensor({1, 6});
            std::vector<double> same;
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = row.to_vector();
                same.insert(same.end(), r.begin(), r.end());
            }
            const Tensor x = Tensor::from({n, 6}, same);
            con_err = std::max(con_err, std::abs(loss::contrastive_loss(x, x, 0.07).item() - std::log(double(n))));
        }
        o.detail << " contrastive_vs_logN=" << con_err;
        o.require(con_err <= 1e-12, "contrastive == log N");

        loss::LossWeights cos_only;
        cos_only.mse = 0.0;
        const Tensor z = rng.normal_tensor({2, 4, 6}), t = rng.normal_tensor({2, 4, 6});
        const double base = loss::text_align_loss(z, t, cos_only).item();
        double scale_err = 0.0;
        for (double k : {0.001, 0.5, 3.0, 1e4}) {
            scale_err = std::max(scale_err, std::abs(loss::text_align_loss(nd::scalar_mul(z, k), t, cos_only).item() - base));
        }
        o.detail << " cosine_scale_err=" << scale_err;
        o.require(scale_err <= 1e-12, "cosine term scale-invariant");

        const Tensor u = rng.normal_tensor({2, 3, 4, 4}), c = rng.normal_tensor({2, 3, 4, 4});
        const bool ends = loss::cfg_combine(u, c, 0.0).to_vector() == u.to_vector() &&
                          loss::cfg_combine(u, c, 1.0).to_vector() == c.to_vector();
        o.require(ends, "cfg_combine exact at s=0 and s=1");
    });

    run(3, "v-parameterization round trip", [](Outcome& o) {
        const auto schedule = diffusion::build_schedule();
        nd::Rng rng(3);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Tensor x0 = rng.normal_tensor({1, 4, 8, 8}, 2.0);
            const Tensor eps = rng.normal_tensor({1, 4, 8, 8});
            const std::vector<std::size_t> t{rng.index(schedule.steps())};
            const Tensor x_t = loss::diffuse(x0, eps, t, schedule);
            const auto back = loss::x0_from_v(x_t, loss::v_target(x0, eps, t, schedule), t, schedule).to_vector();
            const auto ref = x0.to_vector();
            for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(back[i] - ref[i]));
        }
        o.detail << " max_abs_err=" << worst;
        o.require(worst <= 1e-12, "x0 recovered within 1e-12");
    });

    run(4, "schedule invariant", [](Outcome& o) {
        const auto s = diffusion::build_schedule();
        double worst = 0.0;
        bool decreasing = true;
        for (std::size_t t = 0; t < s.steps(); ++t) {
            worst = std::max(worst, std::abs(s.alpha[t] * s.alpha[t] + s.sigma[t] * s.sigma[t] - 1.0));
            if (t > 0 && !(s.snr(t) < s.snr(t - 1))) decreasing = false;
        }
        o.detail << " max_unit_err=" << worst;
        o.require(worst <= 1e-12, "alpha^2 + sigma^2 = 1");
        o.require(decreasing, "SNR strictly decreasing");
        // alpha / sigma pairs with SNR exactly 1 and 4
        diffusion::NoiseSchedule spot{{1.0, 2.0}, {1.0, 1.0}};
        o.detail << " w(SNR=1)=" << spot.weight(0, 0.5) << " w(SNR=4)=" << spot.weight(1, 0.5);
        o.require(spot.snr(0) == 1.0 && spot.weight(0, 0.5) == 1.0, "w(1) = 1");
        o.require(spot.snr(1) == 4.0 && spot.weight(1, 0.5) == 0.5, "w(4) = 0.5");
    });

    run(5, "selective finetuning audit", [](Outcome& o) {
        train::RunConfig cfg;
        cfg.epochs_stage1 = 0;
        cfg.epochs_base = 0;
        cfg.epochs_stage2 = 100;
        cfg.max_steps_stage2 = 50;
        const auto ds = signal::gen_synthetic_dataset(cfg.synthetic());
        const auto dir = work_dir("c5");
        train::train_stage1(cfg, ds, dir / "s1");
        const auto encoder = train::load_encoder(cfg, dir / "s1" / "encoder.ckpt");
        const auto encoder_before = encoder->store.snapshot();

        train::RunConfig init_only = cfg;
        init_only.epochs_stage2 = 0;
        train::train_stage2(init_only, ds, *encoder, dir / "init");
        const auto r = train::train_stage2(cfg, ds, *encoder, dir / "run");
        const auto before = signal::load_checkpoint(dir / "init" / "diffusion.ckpt");
        const auto after = signal::load_checkpoint(dir / "run" / "diffusion.ckpt");

        std::size_t frozen = 0, frozen_moved = 0, trainable = 0, trainable_moved = 0;
        for (const auto& [name, t] : after.tensors) {
            const bool moved = t.to_vector() != before.tensors.at(name).to_vector();
            if (diffusion::is_selective_name(name)) {
                ++trainable;
                trainable_moved += moved;
            } else {
                ++frozen;
                frozen_moved += moved;
                if (moved) o.detail << " moved:" << name;
            }
        }
        o.detail << " steps=" << r.steps << " frozen=" << frozen << " frozen_moved=" << frozen_moved
                 << " trainable=" << trainable << " trainable_moved=" << trainable_moved;
        o.require(r.steps == 50, "50 steps");
        o.require(frozen_moved == 0 && r.frozen_changed == 0, "frozen tensors bit-identical");
        o.require(encoder->store.snapshot() == encoder_before && r.encoder_changed == 0, "encoder bit-identical");
        o.require(trainable_moved == trainable && trainable > 0, "every selective tensor updated");
    });

    run(6, "paper-dims shape contract", [](Outcome& o) {
        const auto cfg = model::EncoderConfig::paper();
        nd::ParamStore store;
        nd::Rng rng(6);
        model::Autoencoder ae(cfg, store, rng);
        diffusion::Adapter adapter(store, cfg.width, rng);
        nd::NoGradGuard guard;
        const Tensor z = ae.encode(rng.normal_tensor({2, 128, 440}));
        const Tensor a = adapter(model::mean_pool_latent(z));
        const Tensor c = diffusion::build_condition(z, a);
        o.detail << " latent=" << nd::shape_str(z.shape()) << " adapter=" << nd::shape_str(a.shape())
                 << " condition=" << nd::shape_str(c.shape());
        o.require(z.shape() == nd::Shape{2, 77, 1024}, "(128,440) -> (77,1024)");
        o.require(a.shape() == nd::Shape{2, 4, 1024}, "adapter (.,4,1024)");
        o.require(c.shape() == nd::Shape{2, 81, 1024}, "condition (.,81,1024)");
    });

    // Criteria 7 and 8 share the trained encoder.
    const train::RunConfig desk;
    const auto desk_ds = signal::gen_synthetic_dataset(desk.synthetic());
    const auto desk_dir = work_dir("desk");
    bool stage1_ok = false;

    run(7, "desk-scale stage 1", [&](Outcome& o) {
        o.require(desk.classes == 8 && desk.seed == 7 && desk.epochs_stage1 == 200, "K=8, seed 7, 200 epochs");
        o.require(desk_ds.splits.train.size() == 8 * 16, "16 train items per class");
        const auto start = Clock::now();
        const auto r = train::train_stage1(desk, desk_ds, desk_dir);
        const double elapsed = seconds_since(start);
        stage1_ok = true;
        o.detail << " top1=" << r.final.top1 << " top5=" << r.final.top5 << " dice=" << r.final.dice
                 << " mse=" << r.final.mse << " time=" << elapsed << "s";
        o.require(r.final.top1 >= 0.7, "Top-1 >= 0.7");
        o.require(r.final.top5 >= 0.9, "Top-5 >= 0.9");
        o.require(r.final.dice >= 0.6, "Dice >= 0.6");
        o.require(elapsed < 300.0, "under 5 min");
    });

    run(8, "desk-scale stage 2 guidance direction", [&](Outcome& o) {
        o.require(stage1_ok, "stage 1 encoder available");
        if (!stage1_ok) return;
        o.require(desk.epochs_stage2 == 300 && desk.num_samples == 64, "300 epochs, 64 samples");
        const auto encoder = train::load_encoder(desk, desk_dir / "encoder.ckpt");
        const auto start = Clock::now();
        train::train_stage2(desk, desk_ds, *encoder, desk_dir);
        const auto model = train::load_diffusion(desk, desk_dir / "diffusion.ckpt");
        const auto off = train::score_generation(train::generate(desk, desk_ds, *encoder, *model, 0.0), desk_ds);
        const auto on = train::score_generation(train::generate(desk, desk_ds, *encoder, *model, 7.5), desk_ds);
        const double elapsed = seconds_since(start);
        o.detail << " agreement s=0:" << off.class_agreement << " s=7.5:" << on.class_agreement
                 << " frechet s=0:" << off.frechet << " s=7.5:" << on.frechet << " time=" << elapsed << "s";
        o.require(on.class_agreement > off.class_agreement, "class agreement rises with guidance");
        o.require(on.frechet < off.frechet, "Frechet distance falls with guidance");
        o.require(elapsed < 600.0, "under 10 min");
    });

    run(9, "Frechet oracle", [](Outcome& o) {
        nd::Rng rng(9);
        double shift_err = 0.0, self_err = 0.0;
        for (std::size_t d : {1, 3, 8}) {
            eval::GaussianStats a{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
            eval::GaussianStats b{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
            for (std::size_t i = 0; i < d; ++i) b.mean(i) = rng.normal() * 3.0;
            shift_err = std::max(shift_err, std::abs(eval::frechet_distance(a, b) - b.mean.squaredNorm()));
            self_err = std::max(self_err, std::abs(eval::frechet_distance(b, b)));
        }
        double oracle_err = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> ma(4), mb(4);
            std::vector<std::vector<double>> sa(4, std::vector<double>(4)), sb = sa;
            Eigen::MatrixXd ga(4, 6), gb(4, 6);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 6; ++j) {
                    ga(i, j) = rng.normal();
                    gb(i, j) = rng.normal();
                }
            const Eigen::MatrixXd ca = ga * ga.transpose() / 6.0, cb = gb * gb.transpose() / 6.0;
            eval::GaussianStats a{Eigen::VectorXd(4), ca}, b{Eigen::VectorXd(4), cb};
            for (int i = 0; i < 4; ++i) {
                a.mean(i) = ma[i] = rng.normal();
                b.mean(i) = mb[i] = rng.normal();
                for (int j = 0; j < 4; ++j) {
                    sa[i][j] = ca(i, j);
                    sb[i][j] = cb(i, j);
                }
            }
            oracle_err = std::max(oracle_err, std::abs(eval::frechet_distance(a, b) - frechet_oracle(ma, sa, mb, sb)));
        }
        o.detail << " shift_err=" << shift_err << " self=" << self_err << " oracle_err=" << oracle_err;
        o.require(shift_err <= 1e-8, "FD(N(0,I), N(mu,I)) = |mu|^2");
        o.require(self_err == 0.0, "FD(a,a) = 0");
        o.require(oracle_err <= 1e-8, "4-dim oracle");
    });

    run(10, "retrieval oracle", [](Outcome& o) {
        const std::size_t n = 50, dim = 16, trials = 20;
        const std::vector<std::size_t> ks{1, 5, 10};
        nd::Rng rng(10);
        std::map<std::size_t, double> total;
        bool monotone = true;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            eval::RetrievalIndex index{eval::Embeddings(n, dim, rng.normal_vector(n * dim)), {}, {}};
            std::vector<std::size_t> pairs;
            for (std::size_t i = 0; i < n; ++i) {
                index.labels.push_back(i);
                index.ids.push_back(i);
                pairs.push_back(i);
            }
            const eval::RetrievalQueries queries{eval::Embeddings(n, dim, rng.normal_vector(n * dim)), pairs, pairs};
            double previous = -1.0;
            for (std::size_t k : ks) {
                const double acc = eval::topk_retrieval(queries, index, k, eval::RetrievalMode::image,
                                                        eval::RetrievalScope::global);
                monotone = monotone && acc >= previous;
                previous = acc;
                total[k] += acc;
            }
        }
        for (std::size_t k : ks) {
            const double p = double(k) / double(n), mean = total[k] / double(trials);
            const double se = std::sqrt(p * (1.0 - p) / double(n * trials));
            o.detail << " top" << k << "=" << mean << " (chance " << p << ", se " << se << ")";
            o.require(std::abs(mean - p) <= 3.0 * se, "Top-" + std::to_string(k) + " within 3 SE of K/N");
        }
        o.require(monotone, "monotone in K on every trial");
    });

    run(11, "preprocessing", [](Outcome& o) {
        const signal::PreprocessConfig cfg;
        const std::size_t raw_len = 500;
        const double fs = cfg.fs;
        auto tone = [&](double f) {
            std::vector<double> x(raw_len);
            for (std::size_t i = 0; i < raw_len; ++i) x[i] = std::sin(2.0 * std::numbers::pi * f * double(i) / fs);
            return x;
        };
        const auto low = tone(2.0), line = tone(50.0);
        std::vector<double> raw = low;
        raw.insert(raw.end(), line.begin(), line.end());
        const auto w = signal::preprocess(raw, 2, cfg);
        o.require(w.channels == 2 && w.samples == 440, "500 -> 440 samples");
        const std::size_t skip = signal::discard_count(cfg);
        o.require(skip == 20 && skip + cfg.target_length <= raw_len, "20-sample discard");

        auto window = [&](const std::vector<double>& x) {
            return std::vector<double>(x.begin() + long(skip), x.begin() + long(skip + cfg.target_length));
        };
        const std::vector<double> out_low(w.values.begin(), w.values.begin() + 440);
        const std::vector<double> out_line(w.values.begin() + 440, w.values.end());
        const double atten_db = 20.0 * std::log10(rms(out_low) / rms(window(low)));
        const double line_db = 20.0 * std::log10(rms(out_line) / rms(window(line)));
        double oracle_err = 0.0;
        for (const auto& [in, out] : {std::pair{&low, &out_low}, std::pair{&line, &out_line}}) {
            const auto ref = window(dft_bandpass(*in, fs, cfg.lo, cfg.hi, 2.0));
            for (std::size_t i = 0; i < ref.size(); ++i) oracle_err = std::max(oracle_err, std::abs(ref[i] - (*out)[i]));
        }
        o.detail << " 2Hz=" << atten_db << "dB 50Hz=" << line_db << "dB oracle_err=" << oracle_err;
        o.require(atten_db <= -20.0, "2 Hz attenuated >= 20 dB");
        o.require(std::abs(line_db) <= 1.0, "50 Hz within 1 dB");
        o.require(oracle_err <= 1e-9, "matches DFT oracle");
    });

    run(12, "CLI determinism", [](Outcome& o) {
        const auto dir = work_dir("c12");
        const auto cfg_path = dir / "run.json";
        train::RunConfig cfg = tiny_config();
        cfg.data_dir = (dir / "out" / "data").string();
        cfg.encoder_checkpoint = (dir / "out" / "stage1" / "encoder.ckpt").string();
        cfg.diffusion_checkpoint = (dir / "out" / "stage2" / "diffusion.ckpt").string();
        std::ofstream(cfg_path) << cfg.to_json().dump(2);
        const std::vector<std::pair<std::string, std::string>> commands{
            {"gen-data", "data"},       {"train-stage1", "stage1"},     {"train-stage2", "stage2"},
            {"sample", "sample"},       {"eval-retrieval", "retrieval"}, {"eval-gen", "gen"},
            {"cfg-sweep", "sweep"},     {"grad-check", "grad"}};
        auto run_all = [&]() {
            std::filesystem::remove_all(dir / "out");
            for (const auto& [cmd, out] : commands) {
                const std::string out_dir = (dir / "out" / out).string();
                const std::string config = cfg_path.string();
                std::vector<const char*> argv{"eegdiff", cmd.c_str(), "--config", config.c_str(),
                                              "--seed", "5", "--out", out_dir.c_str()};
                std::ostringstream sink_out, sink_err;
                const int code = train::run_cli(int(argv.size()), argv.data(), sink_out, sink_err);
                if (code != 0) throw std::runtime_error(cmd + " exited " + std::to_string(code) + ": " + sink_err.str());
            }
            return tree(dir / "out");
        };
        const auto first = run_all();
        const auto second = run_all();
        o.detail << " files=" << first.size();
        for (const auto& [name, bytes] : first) {
            const auto it = second.find(name);
            if (it == second.end() || it->second != bytes) o.detail << " differs:" << name;
        }
        o.require(first == second, "all output files byte-identical");
        o.require(first.size() >= 12, "every command wrote its outputs");
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
