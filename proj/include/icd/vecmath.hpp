#ifndef ICD_VECMATH_HPP
#define ICD_VECMATH_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "icd/errors.hpp"

namespace icd {

// Every kernel accumulates in double regardless of the storage scalar.

namespace detail {

template <typename DerivedA, typename DerivedB>
void require_same_size(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                       const char* op) {
  if (a.size() != b.size()) {
    throw DomainError(std::string(op) + ": dimension mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
}

/// Cosine from precomputed dot product and norms, clamped to [-1, 1].
inline double cosine_from(double dot, double norm_a, double norm_b) {
  return std::clamp(dot / (norm_a * norm_b), -1.0, 1.0);
}

}  // namespace detail

template <typename DerivedA, typename DerivedB>
double dot(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::require_same_size(a, b, "dot");
  return a.template cast<double>().reshaped().dot(b.template cast<double>().reshaped());
}

template <typename Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.template cast<double>().norm();
}

/// Unit-length copy of `v`. Throws DomainError for the zero vector.
template <typename Derived>
typename Derived::PlainObject l2_normalize(const Eigen::MatrixBase<Derived>& v) {
  const double n = l2_norm(v);
  if (!(n > 0.0)) throw DomainError("l2_normalize: zero vector");
  using Scalar = typename Derived::Scalar;
  return (v.template cast<double>() / n).template cast<Scalar>();
}

template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::require_same_size(a, b, "cosine");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("cosine: zero vector");
  return detail::cosine_from(dot(a, b), na, nb);
}

/// Squared Euclidean distance; the competition similarity is its negation.
template <typename DerivedA, typename DerivedB>
double sq_euclid(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::require_same_size(a, b, "sq_euclid");
  return (a.template cast<double>().reshaped() - b.template cast<double>().reshaped()).squaredNorm();
}

}  // namespace icd

#endif  // ICD_VECMATH_HPP
