#ifndef ICD_KNN_HPP
#define ICD_KNN_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icd/embedding_set.hpp"
#include "icd/parallel.hpp"
#include "icd/vecmath.hpp"

namespace icd {

enum class Metric { cosine, neg_sq_euclid };

inline std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "neg_sq_euclid") return Metric::neg_sq_euclid;
  return std::nullopt;
}

inline std::string_view to_string(Metric m) {
  return m == Metric::cosine ? "cosine" : "neg_sq_euclid";
}

struct Neighbor {
  std::size_t index;  // corpus row
  std::string id;
  double similarity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Neighbors of one query, descending similarity, ties by ascending corpus row.
struct NeighborList {
  std::string query_id;
  std::vector<Neighbor> neighbors;

  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

/// Precomputed per-row norms of a corpus, reused across queries.
template <typename Scalar>
class Corpus {
 public:
  Corpus(const EmbeddingSet<Scalar>& set, Metric metric) : set_(set), metric_(metric) {
    if (set.empty()) throw DomainError("knn: corpus is empty");
    if (metric == Metric::cosine) {
      norms_.resize(set.size());
      for (std::size_t j = 0; j < set.size(); ++j) {
        norms_[j] = l2_norm(set.row(j));
        if (!(norms_[j] > 0.0)) throw DomainError("knn: zero corpus vector '" + set.id(j) + "'");
      }
    }
  }

  const EmbeddingSet<Scalar>& set() const { return set_; }
  Metric metric() const { return metric_; }

  /// Metric value between `query` and corpus row j.
  template <typename Derived>
  double similarity(const Eigen::MatrixBase<Derived>& query, double query_norm, std::size_t j) const {
    if (metric_ == Metric::cosine) return detail::cosine_from(dot(query, set_.row(j)), query_norm, norms_[j]);
    return -sq_euclid(query, set_.row(j));
  }

  /// Exact top-k for one query vector.
  template <typename Derived>
  std::vector<Neighbor> nearest(const Eigen::MatrixBase<Derived>& query, std::size_t k) const {
    if (k == 0) throw DomainError("knn: k must be >= 1");
    if (query.size() != set_.dim()) {
      throw DomainError("knn: dimension mismatch (" + std::to_string(query.size()) + " vs " +
                        std::to_string(set_.dim()) + ")");
    }
    double query_norm = 0.0;
    if (metric_ == Metric::cosine) {
      query_norm = l2_norm(query);
      if (!(query_norm > 0.0)) throw DomainError("knn: zero query vector");
    }
    const std::size_t n = set_.size();
    std::vector<double> sims(n);
    for (std::size_t j = 0; j < n; ++j) sims[j] = similarity(query, query_norm, j);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto better = [&](std::size_t a, std::size_t b) {
      return sims[a] > sims[b] || (sims[a] == sims[b] && a < b);
    };
    const std::size_t take = std::min(k, n);
    if (take < n) {
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), better);

    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) out.push_back({order[r], set_.id(order[r]), sims[order[r]]});
    return out;
  }

 private:
  const EmbeddingSet<Scalar>& set_;
  Metric metric_;
  std::vector<double> norms_;
};

/// Exact brute-force k-NN. Output order follows query order for any thread count.
template <typename Scalar>
std::vector<NeighborList> top_k(const EmbeddingSet<Scalar>& queries, const EmbeddingSet<Scalar>& corpus,
                                std::size_t k, Metric metric, unsigned threads = 0) {
  if (k == 0) throw DomainError("knn: k must be >= 1");
  if (queries.dim() != corpus.dim()) {
    throw DomainError("knn: dimension mismatch (queries " + std::to_string(queries.dim()) + ", corpus " +
                      std::to_string(corpus.dim()) + ")");
  }
  const Corpus<Scalar> index(corpus, metric);
  std::vector<NeighborList> out(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    out[i].query_id = queries.id(i);
    out[i].neighbors = index.nearest(queries.row(i), k);
  });
  return out;
}

}  // namespace icd

#endif  // ICD_KNN_HPP
