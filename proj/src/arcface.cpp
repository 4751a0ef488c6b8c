#include "icd/arcface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "icd/binary_io.hpp"
#include "icd/errors.hpp"

namespace icd {

void ArcFaceHead::validate() const {
  if (centroids.rows() < 1 || centroids.cols() < 1) throw ValidationError("arcface: empty centroid matrix");
  if (!centroids.allFinite()) throw ValidationError("arcface: non-finite centroids");
  for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
    if (std::abs(centroids.row(j).norm() - 1.0) > 1e-6) {
      throw ValidationError("arcface: centroid row " + std::to_string(j) + " is not unit-normalized");
    }
  }
  if (!(margin >= 0.0 && margin < std::numbers::pi / 2)) throw ValidationError("arcface: margin outside [0, pi/2)");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("arcface: scale must be > 0");
}

namespace {

void check_inputs(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target) {
  if (embedding.size() != head.embed_dim()) {
    throw DomainError("arcface: embedding dim " + std::to_string(embedding.size()) + " != head dim " +
                      std::to_string(head.embed_dim()));
  }
  if (target < 0 || target >= head.num_classes()) throw DomainError("arcface: target class out of range");
  if (!embedding.allFinite()) throw DomainError("arcface: non-finite embedding");
  const double norm = embedding.norm();
  if (std::abs(norm - 1.0) > kEmbeddingNormTolerance) {
    throw DomainError("arcface: embedding is not unit-normalized (norm " + std::to_string(norm) + ")");
  }
}

/// Cosines between each normalized centroid row and the normalized embedding.
Eigen::VectorXd cosines(const ArcFaceHead& head, const Eigen::VectorXd& embedding, const Eigen::VectorXd& row_norms) {
  Eigen::VectorXd c = (head.centroids * embedding).cwiseQuotient(row_norms) / embedding.norm();
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Whether the target angle lies in the region where cos(theta + m) is monotone.
bool in_margin_region(double cos_theta, double margin) {
  return cos_theta >= -std::cos(margin);  // theta <= pi - m
}

double target_logit(double cos_theta, double margin, double scale) {
  if (!in_margin_region(cos_theta, margin)) return scale * (cos_theta - margin * std::sin(margin));
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  return scale * (cos_theta * std::cos(margin) - sin_theta * std::sin(margin));
}

}  // namespace

Eigen::VectorXd arcface_logits(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target) {
  check_inputs(head, embedding, target);
  const Eigen::VectorXd c = cosines(head, embedding, head.centroids.rowwise().norm());
  Eigen::VectorXd logits = head.scale * c;
  logits[target] = target_logit(c[target], head.margin, head.scale);
  return logits;
}

double cross_entropy(const Eigen::VectorXd& logits, Eigen::Index target) {
  Eigen::Index top = 0;
  const double max_logit = logits.maxCoeff(&top);
  // log-sum-exp with the leading term factored out, so tiny losses survive as log1p.
  double tail = 0.0;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    if (j != top) tail += std::exp(logits[j] - max_logit);
  }
  return (max_logit - logits[target]) + std::log1p(tail);
}

double arcface_loss(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target) {
  return cross_entropy(arcface_logits(head, embedding, target), target);
}

ArcFaceGradient arcface_grad(const ArcFaceHead& head, const Eigen::VectorXd& embedding, Eigen::Index target) {
  check_inputs(head, embedding, target);
  const Eigen::VectorXd row_norms = head.centroids.rowwise().norm();
  const double e_norm = embedding.norm();
  const Eigen::VectorXd c = cosines(head, embedding, row_norms);

  const double theta = std::acos(c[target]);
  if (theta < kSingularAngle || theta > std::numbers::pi - kSingularAngle) {
    throw DomainError("arcface: target angle is singular (theta = " + std::to_string(theta) + ")");
  }

  Eigen::VectorXd logits = head.scale * c;
  logits[target] = target_logit(c[target], head.margin, head.scale);

  ArcFaceGradient grad;
  grad.loss = cross_entropy(logits, target);

  // dL/dlogit = softmax - onehot
  Eigen::VectorXd dlogit = (logits.array() - logits.maxCoeff()).exp();
  dlogit /= dlogit.sum();
  dlogit[target] -= 1.0;

  // dlogit/dcos
  Eigen::VectorXd dcos = head.scale * dlogit;
  if (in_margin_region(c[target], head.margin)) {
    const double ct = std::clamp(c[target], -1.0 + kCosineGuard, 1.0 - kCosineGuard);
    const double sin_theta = std::sqrt(1.0 - ct * ct);
    dcos[target] *= std::cos(head.margin) + ct * std::sin(head.margin) / sin_theta;
  }

  // cos_j = <w_j, e> / (|w_j| |e|)
  const Eigen::VectorXd e_hat = embedding / e_norm;
  grad.d_embedding = Eigen::VectorXd::Zero(embedding.size());
  grad.d_centroids.resize(head.num_classes(), head.embed_dim());
  for (Eigen::Index j = 0; j < head.num_classes(); ++j) {
    const Eigen::VectorXd w_hat = head.centroids.row(j).transpose() / row_norms[j];
    grad.d_embedding += dcos[j] * (w_hat - c[j] * e_hat) / e_norm;
    grad.d_centroids.row(j) = (dcos[j] * (e_hat - c[j] * w_hat) / row_norms[j]).transpose();
  }
  return grad;
}

namespace {

constexpr std::string_view kArcMagic = "ARC1";

}  // namespace

std::string encode_head(const ArcFaceHead& head) {
  head.validate();
  std::string out(kArcMagic);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(head.num_classes()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(head.embed_dim()));
  binary::put<double>(out, head.margin);
  binary::put<double>(out, head.scale);
  for (Eigen::Index r = 0; r < head.centroids.rows(); ++r) {
    for (Eigen::Index c = 0; c < head.centroids.cols(); ++c) {
      binary::put<float>(out, static_cast<float>(head.centroids(r, c)));
    }
  }
  return out;
}

ArcFaceHead decode_head(std::string_view bytes) {
  if (bytes.substr(0, 4) != kArcMagic) throw FormatError("bad ARC1 magic");
  binary::Reader in(bytes.substr(4));
  const auto classes = in.get<std::uint32_t>();
  const auto dim = in.get<std::uint32_t>();
  if (classes == 0 || dim == 0) throw FormatError("bad ARC1 dimensions");
  ArcFaceHead head;
  head.margin = in.get<double>();
  head.scale = in.get<double>();
  const std::size_t expected = static_cast<std::size_t>(classes) * dim * 4;
  if (in.remaining() < expected) throw IoError("truncated ARC1 payload");
  if (in.remaining() > expected) throw FormatError("trailing bytes after ARC1 payload");
  head.centroids.resize(classes, dim);
  for (std::uint32_t r = 0; r < classes; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) head.centroids(r, c) = in.get<float>();
  }
  head.validate();
  return head;
}

void save_head(const ArcFaceHead& head, const std::string& path) { binary::write_file(path, encode_head(head)); }

ArcFaceHead load_head(const std::string& path) { return decode_head(binary::read_file(path)); }

}  // namespace icd
