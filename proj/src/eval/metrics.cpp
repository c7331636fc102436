#include "eegdiff/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace eegdiff::eval {

namespace {

double cosine(const double* a, const double* b, std::size_t d) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        ab += a[j] * b[j];
        aa += a[j] * a[j];
        bb += b[j] * b[j];
    }
    return ab / (std::max(std::sqrt(aa), 1e-12) * std::max(std::sqrt(bb), 1e-12));
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
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

// Eigen decomposition of a symmetric matrix; eigenvalues ascending.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_symmetric(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition did not converge");
    return solver;
}

} // namespace

Embeddings::Embeddings(std::size_t r, std::size_t d, std::vector<double> v) : rows(r), dim(d), values(std::move(v)) {
    if (values.size() != rows * dim) throw std::invalid_argument("embeddings: value count does not match rows x dim");
}

const char* mode_name(RetrievalMode m) { return m == RetrievalMode::image ? "image" : "label"; }
const char* scope_name(RetrievalScope s) { return s == RetrievalScope::global ? "global" : "local"; }

void RetrievalIndex::validate(std::size_t classes) const {
    if (labels.size() != embeddings.rows || ids.size() != embeddings.rows) {
        throw std::invalid_argument("retrieval index: labels and ids must match the row count");
    }
    for (double v : embeddings.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("retrieval index: non-finite embedding");
    }
    for (std::size_t l : labels) {
        if (l >= classes) throw std::invalid_argument("retrieval index: label out of range");
    }
}

std::vector<std::size_t> rank_candidates(const double* query, const RetrievalIndex& index,
                                         const std::vector<std::size_t>& candidates) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(candidates.size());
    for (std::size_t pos : candidates) scored.emplace_back(cosine(query, index.embeddings.row(pos), index.embeddings.dim), pos);
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return index.ids[a.second] < index.ids[b.second];
    });
    std::vector<std::size_t> order;
    order.reserve(scored.size());
    for (const auto& s : scored) order.push_back(s.second);
    return order;
}

std::vector<std::vector<std::size_t>> contiguous_batches(std::size_t count, std::size_t size) {
    if (size == 0) throw std::invalid_argument("batch size must be positive");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < count; start += size) {
        std::vector<std::size_t> b(std::min(size, count - start));
        std::iota(b.begin(), b.end(), start);
        out.push_back(std::move(b));
    }
    return out;
}

double topk_retrieval(const RetrievalQueries& queries, const RetrievalIndex& index, std::size_t k, RetrievalMode mode,
                      RetrievalScope scope, const std::vector<std::vector<std::size_t>>& batches) {
    if (k == 0) throw std::invalid_argument("top-k retrieval: k must be at least 1");
    const std::size_t n = queries.embeddings.rows;
    if (n == 0) throw std::invalid_argument("top-k retrieval: no queries");
    if (queries.embeddings.dim != index.embeddings.dim) throw std::invalid_argument("top-k retrieval: width mismatch");
    if (queries.labels.size() != n || queries.pair_ids.size() != n) {
        throw std::invalid_argument("top-k retrieval: query labels and pair ids must match the query count");
    }

    std::vector<std::size_t> all(index.embeddings.rows);
    std::iota(all.begin(), all.end(), 0);
    // gallery position of each id, and the batch holding each position
    std::vector<std::size_t> batch_of(index.embeddings.rows, batches.size());
    if (scope == RetrievalScope::local) {
        if (batches.empty()) throw std::invalid_argument("top-k retrieval: local scope needs a batch partition");
        for (std::size_t b = 0; b < batches.size(); ++b) {
            for (std::size_t pos : batches[b]) batch_of.at(pos) = b;
        }
    }
    auto position_of = [&](std::size_t id) {
        const auto it = std::find(index.ids.begin(), index.ids.end(), id);
        if (it == index.ids.end()) throw std::invalid_argument("top-k retrieval: pair id " + std::to_string(id) + " not in index");
        return static_cast<std::size_t>(it - index.ids.begin());
    };

    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<std::size_t>* pool = &all;
        if (scope == RetrievalScope::local) {
            const std::size_t b = batch_of[position_of(queries.pair_ids[i])];
            if (b == batches.size()) throw std::invalid_argument("top-k retrieval: pair outside every batch");
            pool = &batches[b];
        }
        if (k > pool->size()) {
            throw std::invalid_argument("top-k retrieval: k=" + std::to_string(k) + " exceeds candidate pool of " +
                                        std::to_string(pool->size()));
        }
        const auto ranked = rank_candidates(queries.embeddings.row(i), index, *pool);
        bool hit = false;
        for (std::size_t r = 0; r < k && !hit; ++r) {
            hit = mode == RetrievalMode::image ? index.ids[ranked[r]] == queries.pair_ids[i]
                                               : index.labels[ranked[r]] == queries.labels[i];
        }
        hits += hit;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

Eigen::MatrixXd cosine_map(const Embeddings& embeddings, const std::vector<std::size_t>& labels, std::size_t classes) {
    if (labels.size() != embeddings.rows) throw std::invalid_argument("cosine_map: one label per row required");
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes),
                                                   static_cast<Eigen::Index>(embeddings.dim));
    std::vector<double> counts(classes, 0.0);
    for (std::size_t i = 0; i < embeddings.rows; ++i) {
        const std::size_t c = labels[i];
        if (c >= classes) throw std::invalid_argument("cosine_map: label out of range");
        counts[c] += 1.0;
        for (std::size_t j = 0; j < embeddings.dim; ++j) {
            means(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) += embeddings.row(i)[j];
        }
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (counts[c] == 0.0) throw std::invalid_argument("cosine_map: class " + std::to_string(c) + " is empty");
        means.row(static_cast<Eigen::Index>(c)) /= counts[c];
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(classes));
    for (std::size_t a = 0; a < classes; ++a) {
        for (std::size_t b = a; b < classes; ++b) {
            const Eigen::VectorXd ra = means.row(static_cast<Eigen::Index>(a)).transpose();
            const Eigen::VectorXd rb = means.row(static_cast<Eigen::Index>(b)).transpose();
            const double v = cosine(ra.data(), rb.data(), embeddings.dim);
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
        }
    }
    return out;
}

GaussianStats GaussianStats::fit(const Embeddings& samples) {
    if (samples.rows < 2) throw std::invalid_argument("gaussian fit: need at least 2 samples");
    const auto n = static_cast<Eigen::Index>(samples.rows), d = static_cast<Eigen::Index>(samples.dim);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
        samples.values.data(), n, d);
    GaussianStats s;
    s.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    s.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
    return s;
}

void GaussianStats::validate() const {
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
        throw std::invalid_argument("gaussian stats: covariance shape does not match mean");
    }
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("gaussian stats: covariance is not symmetric");
    }
    if (mean.size() > 0 && eigen_symmetric(covariance).eigenvalues().minCoeff() < -1e-8) {
        throw std::invalid_argument("gaussian stats: covariance is not positive semidefinite");
    }
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    if (a.mean.size() != b.mean.size()) throw std::invalid_argument("frechet_distance: dimension mismatch");
    a.validate();
    b.validate();
    const auto ea = eigen_symmetric(a.covariance);
    const Eigen::VectorXd root_vals = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root_a = ea.eigenvectors() * root_vals.asDiagonal() * ea.eigenvectors().transpose();
    const Eigen::VectorXd product_vals = eigen_symmetric(root_a * b.covariance * root_a).eigenvalues();
    double trace_root = 0.0;
    for (double v : product_vals) trace_root += v < 1e-10 ? 0.0 : std::sqrt(v);
    const double d = (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_root;
    return std::max(d, 0.0);
}

double class_agreement(const Embeddings& generated, const std::vector<std::size_t>& labels, const Embeddings& anchors) {
    if (generated.rows == 0 || anchors.rows == 0) throw std::invalid_argument("class_agreement: empty input");
    if (generated.dim != anchors.dim) throw std::invalid_argument("class_agreement: width mismatch");
    if (labels.size() != generated.rows) throw std::invalid_argument("class_agreement: one label per sample required");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < generated.rows; ++i) {
        if (labels[i] >= anchors.rows) throw std::invalid_argument("class_agreement: label without an anchor");
        std::size_t best = 0;
        double best_sim = -2.0;
        for (std::size_t c = 0; c < anchors.rows; ++c) {
            const double s = cosine(generated.row(i), anchors.row(c), generated.dim);
            if (s > best_sim) {
                best_sim = s;
                best = c;
            }
        }
        agree += best == labels[i];
    }
    return static_cast<double>(agree) / static_cast<double>(generated.rows);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void export_embeddings(const std::filesystem::path& path, const Embeddings& embeddings,
                       const std::vector<std::size_t>& ids, const std::vector<std::size_t>& labels) {
    if (ids.size() != embeddings.rows || labels.size() != embeddings.rows) {
        throw std::invalid_argument("export_embeddings: ids and labels must match the row count");
    }
    std::string text = "id,label";
    for (std::size_t j = 0; j < embeddings.dim; ++j) text += ",d" + std::to_string(j);
    text += '\n';
    for (std::size_t i = 0; i < embeddings.rows; ++i) {
        text += std::to_string(ids[i]) + "," + std::to_string(labels[i]);
        for (std::size_t j = 0; j < embeddings.dim; ++j) text += "," + format_double(embeddings.row(i)[j]);
        text += '\n';
    }
    write_atomically(path, text);
}

void write_metric_rows(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
    std::string text = "metric,scope,mode,K,value\n";
    for (const auto& r : rows) {
        text += r.metric + "," + r.scope + "," + r.mode + "," + std::to_string(r.k) + "," + format_double(r.value) + "\n";
    }
    write_atomically(path, text);
}

} // namespace eegdiff::eval
