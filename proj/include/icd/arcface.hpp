#ifndef ICD_ARCFACE_HPP
#define ICD_ARCFACE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>

namespace icd {

/// ArcFace classification head: unit class centroids (one per row), an
/// additive angular margin applied to the target class, and a logit scale.
struct ArcFaceHead {
  Eigen::MatrixXd centroids;  // num_classes x embed_dim
  double margin = 0.4;
  double scale = 40.0;

  Eigen::Index num_classes() const { return centroids.rows(); }
  Eigen::Index embed_dim() const { return centroids.cols(); }

  /// Unit rows (within 1e-6), margin in [0, pi/2), scale > 0.
  void validate() const;
};

/// Embeddings may drift this far from unit norm before logits refuse them.
inline constexpr double kEmbeddingNormTolerance = 1e-4;

/// Cosines are kept this far from +-1 wherever d(theta)/d(cos) is evaluated.
inline constexpr double kCosineGuard = 1e-7;

/// Target angles closer than this to 0 or pi have no usable gradient.
inline constexpr double kSingularAngle = 1e-6;

/// Scaled cosine logits with the margin applied to `target`. For
/// theta + m > pi the target logit continues linearly as s*(cos(theta) - m*sin(m)).
Eigen::VectorXd arcface_logits(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target);

/// Softmax cross entropy of the logits against `target`.
double arcface_loss(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target);

/// Numerically stable -log softmax(logits)[target].
double cross_entropy(const Eigen::VectorXd& logits, Eigen::Index target);

struct ArcFaceGradient {
  Eigen::MatrixXd d_centroids;  // same shape as head.centroids
  Eigen::VectorXd d_embedding;
  double loss = 0.0;
};

/// Analytic gradient of arcface_loss. Cosines are taken between the
/// normalized row and the normalized embedding, so both gradients include
/// the normalization Jacobian. Throws DomainError when the target angle is
/// within kSingularAngle of 0 or pi.
ArcFaceGradient arcface_grad(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target);

// ARC1 layout, little-endian: "ARC1" | u32 num_classes | u32 embed_dim
//   | f64 margin | f64 scale | centroids (num_classes*embed_dim f32, row-major)
std::string encode_head(const ArcFaceHead& head);
ArcFaceHead decode_head(std::string_view bytes);
void save_head(const ArcFaceHead& head, const std::string& path);
ArcFaceHead load_head(const std::string& path);

}  // namespace icd

#endif  // ICD_ARCFACE_HPP
