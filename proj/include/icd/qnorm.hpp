#ifndef ICD_QNORM_HPP
#define ICD_QNORM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "icd/embedding_set.hpp"
#include "icd/knn.hpp"
#include "icd/parallel.hpp"
#include "icd/vecmath.hpp"

namespace icd {

/// Query normalization parameters: displacement factor, neighbors averaged
/// for the mean similarity, and neighbors used for the escape direction.
struct NormalizationConfig {
  double beta = 2.0;
  std::size_t n_sim = 3;
  std::size_t n_dir = 100;

  static NormalizationConfig method1() { return {2.0, 3, 3}; }
  static NormalizationConfig method2() { return {1.8, 3, 100}; }

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be > 0");
    if (n_sim < 1) throw DomainError("n_sim must be >= 1");
    if (n_dir < n_sim) throw DomainError("n_dir must be >= n_sim");
  }
};

/// Score-space normalization (subtract alpha times the mean of the n best training scores).
struct ScoreNormConfig {
  double alpha = 1.0;
  std::size_t n = 3;

  void validate() const {
    if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
    if (n < 1) throw DomainError("n must be >= 1");
  }
};

/// Below this norm the Method 2 direction is treated as undefined.
inline constexpr double kDegenerateDirection = 1e-12;

namespace detail {

inline double mean_similarity(const std::vector<Neighbor>& neighbors, std::size_t n_sim) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n_sim; ++k) sum += neighbors[k].similarity;
  return sum / static_cast<double>(n_sim);
}

template <typename Scalar>
void require_training(const EmbeddingSet<Scalar>& training, std::size_t needed, const char* op) {
  if (training.size() < needed) {
    throw DomainError(std::string(op) + ": need " + std::to_string(needed) + " training embeddings, have " +
                      std::to_string(training.size()));
  }
}

template <typename Scalar>
void require_unit(const EmbeddingSet<Scalar>& set, const char* what) {
  if (!set.unit_normalized()) throw DomainError(std::string(what) + " set must be unit-normalized");
}

/// Runs `per_query(corpus, query_row) -> Vector<double>` over every query.
template <typename Scalar, typename Fn>
EmbeddingSet<Scalar> map_queries(const EmbeddingSet<Scalar>& queries, const EmbeddingSet<Scalar>& training,
                                 unsigned threads, Fn&& per_query) {
  if (queries.dim() != training.dim()) throw DomainError("qnorm: query/training dimension mismatch");
  const Corpus<Scalar> corpus(training, Metric::cosine);
  RowMatrix<double> out(static_cast<Eigen::Index>(queries.size()), queries.dim());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    const Vector<double> q = queries.row(i).transpose().template cast<double>();
    out.row(static_cast<Eigen::Index>(i)) = per_query(corpus, q).transpose();
  });
  return EmbeddingSet<Scalar>(queries.ids(), out.template cast<Scalar>(), false);
}

}  // namespace detail

/// Mean cosine similarity between `query` and its n_sim most similar training rows.
template <typename Derived, typename Scalar>
double mean_top_similarity(const Eigen::MatrixBase<Derived>& query, const EmbeddingSet<Scalar>& training,
                           std::size_t n_sim) {
  if (n_sim < 1) throw DomainError("mean_top_similarity: n_sim must be >= 1");
  detail::require_training(training, n_sim, "mean_top_similarity");
  const Corpus<Scalar> corpus(training, Metric::cosine);
  return detail::mean_similarity(corpus.nearest(query, n_sim), n_sim);
}

/// Radial displacement factor beta * sqrt(max(mean similarity, 0)).
inline double displacement(double beta, double mean_similarity) {
  return beta * std::sqrt(std::max(mean_similarity, 0.0));
}

/// Method 1: scale each query by (1 + beta*sqrt(C)), moving it off the unit sphere.
template <typename Scalar>
EmbeddingSet<Scalar> normalize_method1(const EmbeddingSet<Scalar>& queries, const EmbeddingSet<Scalar>& training,
                                       const NormalizationConfig& config, unsigned threads = 0) {
  config.validate();
  detail::require_unit(queries, "query");
  detail::require_unit(training, "training");
  detail::require_training(training, config.n_sim, "normalize_method1");
  return detail::map_queries(queries, training, threads, [&](const Corpus<Scalar>& corpus, const Vector<double>& q) {
    const double c_hat = detail::mean_similarity(corpus.nearest(q, config.n_sim), config.n_sim);
    return Vector<double>(q * (1.0 + displacement(config.beta, c_hat)));
  });
}

/// Unit direction pointing from the training neighbors towards `q`; empty
/// vector when every neighbor coincides with q or the mean direction vanishes.
template <typename Scalar>
Vector<double> escape_direction(const Vector<double>& q, const EmbeddingSet<Scalar>& training,
                                const std::vector<Neighbor>& neighbors) {
  Vector<double> d = Vector<double>::Zero(q.size());
  std::size_t used = 0;
  for (const auto& nb : neighbors) {
    const Vector<double> diff = q - training.row(nb.index).transpose().template cast<double>();
    const double len = diff.norm();
    if (len == 0.0) continue;  // self-match: direction undefined
    d += diff / len;
    ++used;
  }
  if (used == 0) return {};
  d /= static_cast<double>(used);
  const double len = d.norm();
  if (len < kDegenerateDirection) return {};
  return d / len;
}

/// Method 2: move each query beta*sqrt(C) units along the mean unit direction
/// away from its n_dir nearest training embeddings. Falls back to Method 1
/// scaling when that direction is undefined.
template <typename Scalar>
EmbeddingSet<Scalar> normalize_method2(const EmbeddingSet<Scalar>& queries, const EmbeddingSet<Scalar>& training,
                                       const NormalizationConfig& config, unsigned threads = 0) {
  config.validate();
  detail::require_unit(queries, "query");
  detail::require_unit(training, "training");
  detail::require_training(training, config.n_dir, "normalize_method2");
  return detail::map_queries(queries, training, threads, [&](const Corpus<Scalar>& corpus, const Vector<double>& q) {
    const auto neighbors = corpus.nearest(q, config.n_dir);
    const double delta = displacement(config.beta, detail::mean_similarity(neighbors, config.n_sim));
    const Vector<double> direction = escape_direction(q, training, neighbors);
    if (direction.size() == 0) return Vector<double>(q * (1.0 + delta));
    return Vector<double>(q + delta * direction);
  });
}

/// Per-query score lists, index-aligned with the query order.
using ScoreLists = std::vector<std::vector<double>>;

/// Shifts every raw score of query i by -(alpha/n) * (sum of the n largest
/// training scores of query i). Ordering within a query is unchanged.
inline ScoreLists normalize_scores(const ScoreLists& raw_scores, const ScoreLists& query_train_scores,
                                   const ScoreNormConfig& config) {
  config.validate();
  if (raw_scores.size() != query_train_scores.size()) {
    throw DomainError("normalize_scores: raw and training score lists differ in query count");
  }
  ScoreLists out(raw_scores.size());
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    auto train = query_train_scores[i];
    if (train.size() < config.n) {
      throw DomainError("normalize_scores: query " + std::to_string(i) + " has " + std::to_string(train.size()) +
                        " training scores, need " + std::to_string(config.n));
    }
    std::partial_sort(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(config.n), train.end(),
                      std::greater<>());
    double sum = 0.0;
    for (std::size_t k = 0; k < config.n; ++k) sum += train[k];
    const double shift = config.alpha / static_cast<double>(config.n) * sum;
    out[i].reserve(raw_scores[i].size());
    for (double s : raw_scores[i]) out[i].push_back(s - shift);
  }
  return out;
}

}  // namespace icd

#endif  // ICD_QNORM_HPP
