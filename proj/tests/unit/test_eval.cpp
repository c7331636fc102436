#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "eegdiff/eval/metrics.hpp"

using namespace eegdiff::eval;

namespace {

Embeddings random_embeddings(std::size_t rows, std::size_t dim, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    std::vector<double> v(rows * dim);
    for (auto& x : v) x = normal(gen);
    return {rows, dim, v};
}

RetrievalIndex make_index(Embeddings e, std::vector<std::size_t> labels) {
    RetrievalIndex idx;
    idx.ids.resize(e.rows);
    for (std::size_t i = 0; i < e.rows; ++i) idx.ids[i] = i;
    idx.embeddings = std::move(e);
    idx.labels = std::move(labels);
    return idx;
}

using Matrix = std::vector<std::vector<double>>;

Matrix to_rows(const Eigen::MatrixXd& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

// Lower Cholesky factor of an SPD matrix.
Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.size();
    Matrix l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
        }
    }
    return l;
}

// Cyclic Jacobi rotations; returns the eigenvalues of a symmetric matrix.
std::vector<double> jacobi_eigenvalues(Matrix a) {
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

// tr sqrt(Sa Sb) from the eigenvalues of L^T Sb L with Sa = L L^T.
double oracle_frechet(const GaussianStats& a, const GaussianStats& b) {
    const auto sa = to_rows(a.covariance), sb = to_rows(b.covariance);
    const std::size_t n = sa.size();
    const Matrix l = cholesky(sa);
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = 0; q < n; ++q) m[i][j] += l[p][i] * sb[p][q] * l[q][j];
    double root = 0.0;
    for (double v : jacobi_eigenvalues(m)) root += std::sqrt(std::max(v, 0.0));
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dm = a.mean[static_cast<Eigen::Index>(i)] - b.mean[static_cast<Eigen::Index>(i)];
        d += dm * dm + sa[i][i] + sb[i][i];
    }
    return d - 2.0 * root;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("eegdiff_eval_" + name);
}

} // namespace

TEST(Retrieval, HandComputedRanking) {
    // gallery on the unit circle at 0, 90, 180 degrees; a duplicate of item 0 with id 7
    RetrievalIndex idx;
    idx.embeddings = Embeddings(4, 2, {1, 0, 0, 1, -1, 0, 2, 0});
    idx.labels = {0, 1, 2, 1};
    idx.ids = {3, 1, 2, 7};
    idx.validate(3);
    const auto order = rank_candidates(std::vector<double>{1.0, 0.1}.data(), idx, {0, 1, 2, 3});
    EXPECT_EQ(order, (std::vector<std::size_t>{0, 3, 1, 2})); // tie between ids 3 and 7

    RetrievalQueries q;
    q.embeddings = Embeddings(2, 2, {1.0, 0.1, 0.0, 1.0});
    q.labels = {1, 2};
    q.pair_ids = {7, 2};
    // query 1 ranks pos 1, then the zero-cosine tie pos 2 (id 2), pos 0 (id 3), pos 3 (id 7)
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 1, RetrievalMode::image, RetrievalScope::global), 0.0);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 2, RetrievalMode::image, RetrievalScope::global), 1.0);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 1, RetrievalMode::label, RetrievalScope::global), 0.0);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 2, RetrievalMode::label, RetrievalScope::global), 1.0);

    q.pair_ids = {1, 7};
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 2, RetrievalMode::image, RetrievalScope::global), 0.0);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 3, RetrievalMode::image, RetrievalScope::global), 0.5);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 4, RetrievalMode::image, RetrievalScope::global), 1.0);

    // local batches {0, 1} and {2, 3}: query 0 searches {0, 1}, query 1 searches {2, 3}
    const std::vector<std::vector<std::size_t>> batches{{0, 1}, {2, 3}};
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 1, RetrievalMode::image, RetrievalScope::local, batches), 0.0);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 2, RetrievalMode::image, RetrievalScope::local, batches), 1.0);
    EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 1, RetrievalMode::label, RetrievalScope::local, batches), 0.5);
}

TEST(Retrieval, RejectsKBeyondPool) {
    std::mt19937_64 gen(1);
    auto idx = make_index(random_embeddings(6, 3, gen), {0, 1, 2, 0, 1, 2});
    RetrievalQueries q{random_embeddings(6, 3, gen), {0, 1, 2, 0, 1, 2}, {0, 1, 2, 3, 4, 5}};
    EXPECT_THROW(topk_retrieval(q, idx, 7, RetrievalMode::image, RetrievalScope::global), std::invalid_argument);
    EXPECT_THROW(topk_retrieval(q, idx, 0, RetrievalMode::image, RetrievalScope::global), std::invalid_argument);
    EXPECT_THROW(topk_retrieval(q, idx, 3, RetrievalMode::image, RetrievalScope::local, contiguous_batches(6, 2)),
                 std::invalid_argument);
    EXPECT_NO_THROW(topk_retrieval(q, idx, 2, RetrievalMode::image, RetrievalScope::local, contiguous_batches(6, 2)));
    EXPECT_THROW(topk_retrieval(q, idx, 1, RetrievalMode::image, RetrievalScope::local), std::invalid_argument);
}

TEST(Retrieval, IndexValidationRejectsNonFinite) {
    RetrievalIndex idx;
    idx.embeddings = Embeddings(2, 1, {1.0, std::nan("")});
    idx.labels = {0, 0};
    idx.ids = {0, 1};
    EXPECT_THROW(idx.validate(1), std::invalid_argument);
    idx.embeddings.values[1] = 1.0;
    EXPECT_NO_THROW(idx.validate(1));
    EXPECT_THROW(idx.validate(0), std::invalid_argument);
}

TEST(Retrieval, MonotoneInK) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 gen(seed);
        const std::size_t n = 24;
        std::vector<std::size_t> labels(n), pairs(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = i % 4;
            pairs[i] = i;
        }
        auto idx = make_index(random_embeddings(n, 5, gen), labels);
        RetrievalQueries q{random_embeddings(n, 5, gen), labels, pairs};
        for (auto mode : {RetrievalMode::image, RetrievalMode::label}) {
            double prev = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double acc = topk_retrieval(q, idx, k, mode, RetrievalScope::global);
                EXPECT_GE(acc, prev);
                EXPECT_GE(acc, 0.0);
                EXPECT_LE(acc, 1.0);
                prev = acc;
            }
            EXPECT_DOUBLE_EQ(prev, 1.0);
        }
    }
}

TEST(Retrieval, RandomEmbeddingsGiveChanceLevel) {
    // independent queries and gallery: each rank of the pair is equally likely, so E[top-K] = K / N
    const std::size_t n = 20, trials = 400;
    for (std::size_t k : {1, 5, 10}) {
        std::mt19937_64 gen(100 + k);
        double total = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            std::vector<std::size_t> labels(n, 0), pairs(n);
            for (std::size_t i = 0; i < n; ++i) pairs[i] = i;
            auto idx = make_index(random_embeddings(n, 8, gen), labels);
            RetrievalQueries q{random_embeddings(n, 8, gen), labels, pairs};
            total += topk_retrieval(q, idx, k, RetrievalMode::image, RetrievalScope::global);
        }
        const double p = static_cast<double>(k) / n;
        const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n * trials));
        EXPECT_NEAR(total / trials, p, 4.0 * sd) << "k=" << k;
    }
}

TEST(CosineMap, SymmetricWithUnitDiagonal) {
    std::mt19937_64 gen(3);
    const auto e = random_embeddings(30, 6, gen);
    std::vector<std::size_t> labels(30);
    for (std::size_t i = 0; i < 30; ++i) labels[i] = i % 5;
    const auto m = cosine_map(e, labels, 5);
    ASSERT_EQ(m.rows(), 5);
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(m(i, i), 1.0, 1e-12);
        for (int j = 0; j < 5; ++j) {
            EXPECT_EQ(m(i, j), m(j, i));
            EXPECT_LE(std::abs(m(i, j)), 1.0 + 1e-12);
        }
    }
    labels[0] = 5;
    EXPECT_THROW(cosine_map(e, labels, 5), std::invalid_argument);
    EXPECT_THROW(cosine_map(e, std::vector<std::size_t>(30, 0), 2), std::invalid_argument);
}

TEST(CosineMap, HandComputed) {
    const Embeddings e(4, 2, {1, 0, 3, 0, 0, 2, 1, 1});
    const auto m = cosine_map(e, {0, 0, 1, 1}, 2);
    // class means (2, 0) and (0.5, 1.5)
    EXPECT_NEAR(m(0, 1), 0.5 / std::sqrt(2.5), 1e-15);
}

TEST(Gaussian, FitMatchesDirectSums) {
    const Embeddings e(4, 2, {1, 2, 3, 1, 0, 0, 4, 5});
    const auto s = GaussianStats::fit(e);
    EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(s.mean[1], 2.0);
    // deviations x: -1 1 -2 2, y: 0 -1 -2 3
    EXPECT_NEAR(s.covariance(0, 0), 10.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.covariance(1, 1), 14.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.covariance(0, 1), 9.0 / 3.0, 1e-15);
    EXPECT_THROW(GaussianStats::fit(Embeddings(1, 2, {1, 2})), std::invalid_argument);
}

TEST(Gaussian, ValidateRejectsAsymmetricAndIndefinite) {
    GaussianStats s;
    s.mean = Eigen::VectorXd::Zero(2);
    s.covariance.resize(2, 2);
    s.covariance << 1, 0.5, 0.4, 1;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.covariance << 1, 2, 2, 1;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.covariance << 1, 0.5, 0.5, 1;
    EXPECT_NO_THROW(s.validate());
}

TEST(Frechet, MatchesCholeskyJacobiOracle) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        std::mt19937_64 gen(seed);
        const std::size_t d = 3 + seed % 4;
        auto ea = random_embeddings(40, d, gen);
        auto eb = random_embeddings(40, d, gen);
        for (std::size_t i = 0; i < eb.values.size(); ++i) eb.values[i] = 0.5 * eb.values[i] + 0.3 * ea.values[i] + 0.2;
        const auto a = GaussianStats::fit(ea), b = GaussianStats::fit(eb);
        EXPECT_NEAR(frechet_distance(a, b), oracle_frechet(a, b), 1e-9) << "seed " << seed;
    }
}

TEST(Frechet, UnivariateClosedForm) {
    GaussianStats a, b;
    a.mean = Eigen::VectorXd::Constant(1, 1.0);
    b.mean = Eigen::VectorXd::Constant(1, -2.0);
    a.covariance = Eigen::MatrixXd::Constant(1, 1, 4.0);
    b.covariance = Eigen::MatrixXd::Constant(1, 1, 0.25);
    EXPECT_NEAR(frechet_distance(a, b), 9.0 + (2.0 - 0.5) * (2.0 - 0.5), 1e-12);
}

TEST(Frechet, SelfDistanceZeroAndSymmetric) {
    std::mt19937_64 gen(9);
    const auto a = GaussianStats::fit(random_embeddings(50, 5, gen));
    const auto b = GaussianStats::fit(random_embeddings(50, 5, gen));
    EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-10);
    EXPECT_NEAR(frechet_distance(a, b), frechet_distance(b, a), 1e-10);
    EXPECT_GT(frechet_distance(a, b), 0.0);
}

TEST(Frechet, HandlesSingularCovariance) {
    // 3 samples in 4 dims: rank-deficient covariance still yields a finite distance
    std::mt19937_64 gen(11);
    const auto a = GaussianStats::fit(random_embeddings(3, 4, gen));
    const auto b = GaussianStats::fit(random_embeddings(30, 4, gen));
    const double d = frechet_distance(a, b);
    EXPECT_TRUE(std::isfinite(d));
    EXPECT_GE(d, 0.0);
    EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-8);
}

TEST(ClassAgreement, HandComputed) {
    const Embeddings anchors(2, 2, {1, 0, 0, 1});
    const Embeddings gen(3, 2, {2, 0.1, 0.2, 1, 1, 0.9});
    EXPECT_NEAR(class_agreement(gen, {0, 1, 1}, anchors), 2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(class_agreement(gen, {0, 1, 0}, anchors), 1.0);
    EXPECT_THROW(class_agreement(gen, {0, 1, 2}, anchors), std::invalid_argument);
}

TEST(Export, EmbeddingsRoundTripBitExact) {
    std::mt19937_64 gen(5);
    const auto e = random_embeddings(3, 4, gen);
    const auto path = temp_path("emb.csv");
    export_embeddings(path, e, {10, 11, 12}, {0, 2, 1});
    const auto lines = read_lines(path);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "id,label,d0,d1,d2,d3");
    for (std::size_t i = 0; i < 3; ++i) {
        std::stringstream ss(lines[i + 1]);
        std::string cell;
        std::getline(ss, cell, ',');
        EXPECT_EQ(cell, std::to_string(10 + i));
        std::getline(ss, cell, ',');
        for (std::size_t j = 0; j < 4; ++j) {
            ASSERT_TRUE(std::getline(ss, cell, ','));
            EXPECT_EQ(std::strtod(cell.c_str(), nullptr), e.row(i)[j]);
        }
    }
    std::filesystem::remove(path);
}

TEST(Export, MetricRowsLayout) {
    const auto path = temp_path("metrics.csv");
    write_metric_rows(path, {{"topk", "global", "label", 5, 0.1}, {"fd", "-", "-", 0, 2.5}});
    const auto lines = read_lines(path);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "metric,scope,mode,K,value");
    EXPECT_EQ(lines[1], "topk,global,label,5,0.10000000000000001");
    EXPECT_EQ(lines[2], "fd,-,-,0,2.5");
    std::filesystem::remove(path);
}

TEST(Retrieval, ExactPairsGiveTopOne) {
    std::mt19937_64 gen(21);
    const std::size_t n = 12;
    std::vector<std::size_t> labels(n), pairs(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 3;
        pairs[i] = i;
    }
    auto idx = make_index(random_embeddings(n, 6, gen), labels);
    RetrievalQueries q{idx.embeddings, labels, pairs};
    for (auto mode : {RetrievalMode::image, RetrievalMode::label}) {
        EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 1, mode, RetrievalScope::global), 1.0);
        EXPECT_DOUBLE_EQ(topk_retrieval(q, idx, 1, mode, RetrievalScope::local, contiguous_batches(n, 4)), 1.0);
    }
}

TEST(Retrieval, LargeRandomGalleryChanceLevel) {
    const std::size_t n = 1000, k = 5;
    std::mt19937_64 gen(77);
    std::vector<std::size_t> labels(n, 0), pairs(n);
    for (std::size_t i = 0; i < n; ++i) pairs[i] = i;
    auto idx = make_index(random_embeddings(n, 16, gen), labels);
    RetrievalQueries q{random_embeddings(n, 16, gen), labels, pairs};
    const double p = static_cast<double>(k) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(topk_retrieval(q, idx, k, RetrievalMode::image, RetrievalScope::global), p, 3.0 * se);
}

TEST(Retrieval, LocalImageAccuracyDominatesGlobal) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 gen(seed + 40);
        const std::size_t n = 32;
        std::vector<std::size_t> labels(n), pairs(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = i % 4;
            pairs[i] = i;
        }
        auto idx = make_index(random_embeddings(n, 4, gen), labels);
        RetrievalQueries q{random_embeddings(n, 4, gen), labels, pairs};
        for (std::size_t k = 1; k <= 8; ++k) {
            EXPECT_LE(topk_retrieval(q, idx, k, RetrievalMode::image, RetrievalScope::global),
                      topk_retrieval(q, idx, k, RetrievalMode::image, RetrievalScope::local, contiguous_batches(n, 8)));
        }
    }
}

TEST(CosineMap, OrthogonalAndIdenticalMeans) {
    const auto ortho = cosine_map(Embeddings(2, 2, {1, 0, 0, 3}), {0, 1}, 2);
    EXPECT_EQ(ortho(0, 1), 0.0);
    const auto same = cosine_map(Embeddings(3, 2, {1, 2, 1, 2, 1, 2}), {0, 1, 2}, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(same(i, j), 1.0, 1e-15);
}

TEST(CosineMap, MatchesScalarRecomputation) {
    std::mt19937_64 gen(8);
    const auto e = random_embeddings(9, 3, gen);
    const std::vector<std::size_t> labels{0, 1, 2, 2, 1, 0, 0, 1, 2};
    const auto m = cosine_map(e, labels, 3);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            double ma[3] = {0, 0, 0}, mb[3] = {0, 0, 0};
            for (std::size_t i = 0; i < 9; ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    if (labels[i] == a) ma[j] += e.row(i)[j] / 3.0;
                    if (labels[i] == b) mb[j] += e.row(i)[j] / 3.0;
                }
            }
            const double dot = ma[0] * mb[0] + ma[1] * mb[1] + ma[2] * mb[2];
            const double na = std::sqrt(ma[0] * ma[0] + ma[1] * ma[1] + ma[2] * ma[2]);
            const double nb = std::sqrt(mb[0] * mb[0] + mb[1] * mb[1] + mb[2] * mb[2]);
            EXPECT_NEAR(m(static_cast<int>(a), static_cast<int>(b)), dot / (na * nb), 1e-13);
        }
    }
}

TEST(Frechet, ShiftedIdentityGivesSquaredMeanGap) {
    GaussianStats a, b;
    a.mean = Eigen::VectorXd::Zero(4);
    b.mean = Eigen::VectorXd(4);
    b.mean << 0.5, -1.0, 2.0, 0.25;
    a.covariance = b.covariance = Eigen::MatrixXd::Identity(4, 4);
    EXPECT_NEAR(frechet_distance(a, b), b.mean.squaredNorm(), 1e-8);
    b.mean.resize(3);
    b.covariance = Eigen::MatrixXd::Identity(3, 3);
    EXPECT_THROW(frechet_distance(a, b), std::invalid_argument);
}

TEST(ClassAgreement, AnchorsOfOwnClassAndShuffledLabels) {
    std::mt19937_64 gen(13);
    const std::size_t classes = 8;
    const auto anchors = random_embeddings(classes, 16, gen);
    std::vector<std::size_t> own(classes);
    for (std::size_t c = 0; c < classes; ++c) own[c] = c;
    EXPECT_DOUBLE_EQ(class_agreement(anchors, own, anchors), 1.0);

    const std::size_t n = 4000;
    std::vector<double> rows;
    std::vector<std::size_t> labels(n);
    std::uniform_int_distribution<std::size_t> pick(0, classes - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = pick(gen);
        rows.insert(rows.end(), anchors.row(c), anchors.row(c) + 16);
        labels[i] = pick(gen); // independent of the generating class
    }
    const double p = 1.0 / classes;
    EXPECT_NEAR(class_agreement(Embeddings(n, 16, rows), labels, anchors), p, 3.0 * std::sqrt(p * (1 - p) / n));
    EXPECT_THROW(class_agreement(Embeddings(), {}, anchors), std::invalid_argument);
}

TEST(Export, EmptyAndSmallShapes) {
    const auto path = temp_path("small.csv");
    export_embeddings(path, Embeddings(0, 2, {}), {}, {});
    EXPECT_EQ(read_lines(path), (std::vector<std::string>{"id,label,d0,d1"}));
    export_embeddings(path, Embeddings(3, 2, {1, 2, 3, 4, 5, 6}), {0, 1, 2}, {0, 0, 1});
    EXPECT_EQ(read_lines(path).size(), 4u);
    std::filesystem::remove(path);
}
