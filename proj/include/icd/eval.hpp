#ifndef ICD_EVAL_HPP
#define ICD_EVAL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "icd/embedding_set.hpp"
#include "icd/knn.hpp"

namespace icd {

struct ScoredPair {
  std::string query_id;
  std::string reference_id;
  double score;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

/// Submitted (query, reference, score) triples; no (query, reference) repeats.
class ScoredPairs {
 public:
  ScoredPairs() = default;
  explicit ScoredPairs(std::vector<ScoredPair> entries);

  const std::vector<ScoredPair>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const ScoredPairs&, const ScoredPairs&) = default;

 private:
  std::vector<ScoredPair> entries_;
};

inline constexpr std::size_t kDefaultScoreK = 10;

/// Each query's top-k references under score = -||q - r||^2.
template <typename Scalar>
ScoredPairs score_pairs(const EmbeddingSet<Scalar>& queries, const EmbeddingSet<Scalar>& references,
                        std::size_t k = kDefaultScoreK, unsigned threads = 0) {
  const auto lists = top_k(queries, references, k, Metric::neg_sq_euclid, threads);
  std::vector<ScoredPair> entries;
  for (const auto& list : lists) {
    for (const auto& nb : list.neighbors) entries.push_back({list.query_id, nb.id, nb.similarity});
  }
  return ScoredPairs(std::move(entries));
}

/// Micro average precision over the global ranking of all entries
/// (score descending, ties by (query_id, reference_id) ascending). Positives
/// never submitted still count in the |gt| denominator.
double micro_ap(const ScoredPairs& pairs, const GroundTruth& gt);

/// CSV `query_id,reference_id,score`, scores printed with 9 significant digits.
void write_scored_pairs(const ScoredPairs& pairs, std::ostream& out);
ScoredPairs parse_scored_pairs(std::istream& in);
void save_scored_pairs(const ScoredPairs& pairs, const std::string& path);
ScoredPairs load_scored_pairs(const std::string& path);

}  // namespace icd

#endif  // ICD_EVAL_HPP
