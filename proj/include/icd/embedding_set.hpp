#ifndef ICD_EMBEDDING_SET_HPP
#define ICD_EMBEDDING_SET_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "icd/errors.hpp"

namespace icd {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Tolerance on row norms for sets flagged unit_normalized.
inline constexpr double kUnitNormTolerance = 1e-6;

/// Ordered (id, vector) pairs sharing one dimension. Immutable once built;
/// the constructor enforces unique ids, finite values and, when flagged,
/// unit row norms.
template <typename Scalar>
class EmbeddingSet {
 public:
  using Matrix = RowMatrix<Scalar>;

  EmbeddingSet() = default;

  EmbeddingSet(std::vector<std::string> ids, Matrix vectors, bool unit_normalized = false)
      : ids_(std::move(ids)), vectors_(std::move(vectors)), unit_normalized_(unit_normalized) {
    validate();
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  Eigen::Index dim() const { return vectors_.cols(); }
  bool unit_normalized() const { return unit_normalized_; }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const Matrix& vectors() const { return vectors_; }
  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

  std::optional<std::size_t> index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (ids_[i] == id) return i;
    }
    return std::nullopt;
  }

  template <typename Other>
  EmbeddingSet<Other> cast() const {
    return EmbeddingSet<Other>(ids_, vectors_.template cast<Other>(), unit_normalized_);
  }

  /// Subset of rows, in the order given.
  EmbeddingSet select(const std::vector<std::size_t>& rows) const {
    std::vector<std::string> ids;
    Matrix m(static_cast<Eigen::Index>(rows.size()), dim());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      ids.push_back(ids_.at(rows[k]));
      m.row(static_cast<Eigen::Index>(k)) = row(rows[k]);
    }
    return EmbeddingSet(std::move(ids), std::move(m), unit_normalized_);
  }

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.ids_ != b.ids_ || a.unit_normalized_ != b.unit_normalized_ ||
        a.vectors_.rows() != b.vectors_.rows() || a.vectors_.cols() != b.vectors_.cols()) {
      return false;
    }
    return (a.vectors_.array() == b.vectors_.array()).all();
  }

 private:
  void validate() const {
    if (vectors_.cols() < 1) throw ValidationError("embedding dim must be >= 1");
    if (static_cast<Eigen::Index>(ids_.size()) != vectors_.rows()) {
      throw ValidationError("id count " + std::to_string(ids_.size()) + " != row count " +
                            std::to_string(vectors_.rows()));
    }
    std::unordered_map<std::string, std::size_t> seen;
    seen.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!seen.emplace(ids_[i], i).second) throw ValidationError("duplicate id '" + ids_[i] + "'");
    }
    for (Eigen::Index r = 0; r < vectors_.rows(); ++r) {
      if (!vectors_.row(r).allFinite()) {
        throw ValidationError("non-finite value in row '" + ids_[static_cast<std::size_t>(r)] + "'");
      }
      if (unit_normalized_) {
        const double n = vectors_.row(r).template cast<double>().norm();
        if (std::abs(n - 1.0) > kUnitNormTolerance) {
          throw ValidationError("row '" + ids_[static_cast<std::size_t>(r)] +
                                "' flagged unit_normalized has norm " + std::to_string(n));
        }
      }
    }
  }

  std::vector<std::string> ids_;
  Matrix vectors_ = Matrix(0, 1);
  bool unit_normalized_ = false;
};

using EmbeddingSetF = EmbeddingSet<float>;
using EmbeddingSetD = EmbeddingSet<double>;

/// Positive (query, reference) pairs. Each query maps to at most one reference.
class GroundTruth {
 public:
  GroundTruth() = default;
  explicit GroundTruth(std::vector<std::pair<std::string, std::string>> pairs);

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

  bool contains(const std::string& query_id, const std::string& reference_id) const;
  std::optional<std::string> reference_for(const std::string& query_id) const;

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
  std::unordered_map<std::string, std::string> by_query_;
};

}  // namespace icd

#endif  // ICD_EMBEDDING_SET_HPP
