#ifndef ICD_ENSEMBLE_HPP
#define ICD_ENSEMBLE_HPP

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "icd/embedding_set.hpp"
#include "icd/parallel.hpp"

namespace icd {

/// Eigenvalue floor applied before the square root when whitening.
inline constexpr double kWhitenFloor = 1e-12;

/// Fitted PCA. `basis` rows are orthonormal principal axes sorted by
/// descending eigenvalue; each axis has its largest-magnitude component positive.
struct ProjectionModel {
  Eigen::VectorXd mean;         // in_dim
  Eigen::MatrixXd basis;        // out_dim x in_dim
  Eigen::VectorXd eigenvalues;  // out_dim, descending, >= 0

  Eigen::Index in_dim() const { return basis.cols(); }
  Eigen::Index out_dim() const { return basis.rows(); }

  /// Throws ValidationError when shapes disagree or eigenvalues are unsorted or negative.
  void validate() const;

  friend bool operator==(const ProjectionModel& a, const ProjectionModel& b) {
    return a.mean.size() == b.mean.size() && a.basis.rows() == b.basis.rows() &&
           a.basis.cols() == b.basis.cols() && a.eigenvalues.size() == b.eigenvalues.size() &&
           (a.mean.array() == b.mean.array()).all() && (a.basis.array() == b.basis.array()).all() &&
           (a.eigenvalues.array() == b.eigenvalues.array()).all();
  }
};

struct ProjectionOptions {
  bool whiten = true;
  bool renormalize = true;
};

/// Row-wise concatenation of several sets over identical id lists.
template <typename Scalar>
EmbeddingSet<Scalar> concat_embeddings(std::span<const EmbeddingSet<Scalar>> sets) {
  if (sets.empty()) throw ValidationError("concat: need at least one embedding set");
  const auto& ids = sets.front().ids();
  Eigen::Index total = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (sets[s].ids() != ids) {
      throw ValidationError("concat: set " + std::to_string(s) + " has different ids or id order");
    }
    total += sets[s].dim();
  }
  typename EmbeddingSet<Scalar>::Matrix m(static_cast<Eigen::Index>(ids.size()), total);
  Eigen::Index col = 0;
  for (const auto& set : sets) {
    m.middleCols(col, set.dim()) = set.vectors();
    col += set.dim();
  }
  const bool unit = sets.size() == 1 && sets.front().unit_normalized();
  return EmbeddingSet<Scalar>(ids, std::move(m), unit);
}

template <typename Scalar>
EmbeddingSet<Scalar> concat_embeddings(const std::vector<EmbeddingSet<Scalar>>& sets) {
  return concat_embeddings(std::span<const EmbeddingSet<Scalar>>(sets));
}

/// PCA on raw training rows (count x dim), covariance divisor N-1.
ProjectionModel fit_projection(const Eigen::MatrixXd& training, Eigen::Index out_dim);

template <typename Scalar>
ProjectionModel fit_projection(const EmbeddingSet<Scalar>& training, Eigen::Index out_dim) {
  return fit_projection(Eigen::MatrixXd(training.vectors().template cast<double>()), out_dim);
}

/// Projects rows (count x in_dim) to count x out_dim. Rows that project to
/// zero under `renormalize` are collected and reported together in one DomainError.
Eigen::MatrixXd apply_projection(const ProjectionModel& model, const Eigen::MatrixXd& rows,
                                 const ProjectionOptions& options, const std::vector<std::string>& row_ids,
                                 unsigned threads = 0);

template <typename Scalar>
EmbeddingSet<Scalar> apply_projection(const ProjectionModel& model, const EmbeddingSet<Scalar>& set,
                                      const ProjectionOptions& options, unsigned threads = 0) {
  Eigen::MatrixXd out = apply_projection(model, Eigen::MatrixXd(set.vectors().template cast<double>()),
                                         options, set.ids(), threads);
  return EmbeddingSet<Scalar>(set.ids(), out.cast<Scalar>(), options.renormalize);
}

// PCA1 layout, little-endian: "PCA1" | u32 in_dim | u32 out_dim
//   | mean (in_dim f64) | basis (out_dim*in_dim f64, row-major) | eigenvalues (out_dim f64)
std::string encode_projection(const ProjectionModel& model);
ProjectionModel decode_projection(std::string_view bytes);
void save_projection(const ProjectionModel& model, const std::string& path);
ProjectionModel load_projection(const std::string& path);

}  // namespace icd

#endif  // ICD_ENSEMBLE_HPP
