#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eegdiff::eval {

/// Row-major N x D embeddings.
struct Embeddings {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    Embeddings() = default;
    Embeddings(std::size_t rows, std::size_t dim, std::vector<double> values);

    const double* row(std::size_t i) const { return values.data() + i * dim; }
};

/// Gallery for retrieval. ids break ties (ascending) and identify pairs.
struct RetrievalIndex {
    Embeddings embeddings;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> ids;

    /// Throws std::invalid_argument for non-finite rows or mismatched lengths.
    void validate(std::size_t classes) const;
};

enum class RetrievalMode { image, label };
enum class RetrievalScope { global, local };

const char* mode_name(RetrievalMode m);
const char* scope_name(RetrievalScope s);

/// Queries with their labels and the id of their paired gallery item.
struct RetrievalQueries {
    Embeddings embeddings;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> pair_ids;
};

/// Gallery positions ranked by cosine similarity to `query`, descending;
/// equal scores rank by ascending id. Only `candidates` are considered.
std::vector<std::size_t> rank_candidates(const double* query, const RetrievalIndex& index,
                                         const std::vector<std::size_t>& candidates);

/// Fraction of queries with a hit in the top k. Image mode: the paired item is
/// retrieved. Label mode: any retrieved item shares the query's label.
/// Global scope searches the whole index. Local scope requires `batches`, a
/// partition of gallery positions; a query searches the batch holding its pair.
/// Throws std::invalid_argument when k is 0 or exceeds a candidate pool.
double topk_retrieval(const RetrievalQueries& queries, const RetrievalIndex& index, std::size_t k,
                      RetrievalMode mode, RetrievalScope scope,
                      const std::vector<std::vector<std::size_t>>& batches = {});

/// Consecutive gallery positions grouped into batches of `size` (last may be short).
std::vector<std::vector<std::size_t>> contiguous_batches(std::size_t count, std::size_t size);

/// classes x classes cosine similarities between class-mean embeddings.
/// Throws std::invalid_argument when a class has no member.
Eigen::MatrixXd cosine_map(const Embeddings& embeddings, const std::vector<std::size_t>& labels,
                           std::size_t classes);

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    /// Sample mean and unbiased covariance of N >= 2 rows.
    static GaussianStats fit(const Embeddings& samples);
    /// Throws std::invalid_argument unless symmetric within 1e-10 and eigenvalues >= -1e-8.
    void validate() const;
};

/// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)); the root trace comes
/// from the eigenvalues of the symmetric S_a^(1/2) S_b S_a^(1/2).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Fraction of generated rows whose nearest anchor (cosine) has the
/// conditioning label. anchors: one row per class.
double class_agreement(const Embeddings& generated, const std::vector<std::size_t>& labels, const Embeddings& anchors);

/// Shortest decimal that round-trips ("%.17g").
std::string format_double(double v);

/// CSV "id,label,d0,...,d{D-1}".
void export_embeddings(const std::filesystem::path& path, const Embeddings& embeddings,
                       const std::vector<std::size_t>& ids, const std::vector<std::size_t>& labels);

struct MetricRow {
    std::string metric;
    std::string scope;
    std::string mode;
    std::size_t k = 0;
    double value = 0.0;
};

/// CSV "metric,scope,mode,K,value".
void write_metric_rows(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

} // namespace eegdiff::eval
