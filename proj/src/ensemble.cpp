#include "icd/ensemble.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "icd/binary_io.hpp"

namespace icd {

void ProjectionModel::validate() const {
  if (basis.rows() < 1 || basis.cols() < 1) throw ValidationError("projection: empty basis");
  if (mean.size() != basis.cols()) throw ValidationError("projection: mean size != in_dim");
  if (eigenvalues.size() != basis.rows()) throw ValidationError("projection: eigenvalue count != out_dim");
  if (basis.rows() > basis.cols()) throw ValidationError("projection: out_dim > in_dim");
  if (!mean.allFinite() || !basis.allFinite() || !eigenvalues.allFinite()) {
    throw ValidationError("projection: non-finite parameters");
  }
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] < 0.0) throw ValidationError("projection: negative eigenvalue");
    if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) throw ValidationError("projection: eigenvalues not descending");
  }
}

ProjectionModel fit_projection(const Eigen::MatrixXd& training, Eigen::Index out_dim) {
  const Eigen::Index count = training.rows();
  const Eigen::Index dim = training.cols();
  if (out_dim < 1) throw DomainError("pca: out_dim must be >= 1");
  if (count < 1 || out_dim > std::min(count, dim)) {
    throw DomainError("pca: out_dim " + std::to_string(out_dim) + " exceeds min(count=" + std::to_string(count) +
                      ", dim=" + std::to_string(dim) + ")");
  }

  ProjectionModel model;
  model.mean = training.colwise().mean().transpose();
  const Eigen::MatrixXd centered = training.rowwise() - model.mean.transpose();
  const double divisor = static_cast<double>(std::max<Eigen::Index>(count - 1, 1));
  Eigen::MatrixXd covariance = Eigen::MatrixXd::Zero(dim, dim);
  covariance.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / divisor);
  covariance.triangularView<Eigen::StrictlyUpper>() = covariance.transpose();

  // Eigen returns eigenvalues in ascending order.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) throw DomainError("pca: eigendecomposition failed");

  model.basis.resize(out_dim, dim);
  model.eigenvalues.resize(out_dim);
  for (Eigen::Index k = 0; k < out_dim; ++k) {
    const Eigen::Index src = dim - 1 - k;
    Eigen::VectorXd axis = solver.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    axis.cwiseAbs().maxCoeff(&pivot);
    if (axis[pivot] < 0.0) axis = -axis;
    model.basis.row(k) = axis.transpose();
    model.eigenvalues[k] = std::max(solver.eigenvalues()[src], 0.0);
  }
  return model;
}

Eigen::MatrixXd apply_projection(const ProjectionModel& model, const Eigen::MatrixXd& rows,
                                 const ProjectionOptions& options, const std::vector<std::string>& row_ids,
                                 unsigned threads) {
  if (rows.cols() != model.in_dim()) {
    throw DomainError("pca apply: input dim " + std::to_string(rows.cols()) + " != model in_dim " +
                      std::to_string(model.in_dim()));
  }
  Eigen::VectorXd inv_scale = Eigen::VectorXd::Ones(model.out_dim());
  if (options.whiten) {
    inv_scale = model.eigenvalues.cwiseMax(kWhitenFloor).cwiseSqrt().cwiseInverse();
  }

  constexpr Eigen::Index kBlock = 1024;
  const Eigen::Index n = rows.rows();
  const auto blocks = static_cast<std::size_t>((n + kBlock - 1) / kBlock);
  Eigen::MatrixXd out(n, model.out_dim());
  std::vector<char> zero_row(static_cast<std::size_t>(n), 0);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const Eigen::Index start = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index len = std::min(kBlock, n - start);
    Eigen::MatrixXd block = (rows.middleRows(start, len).rowwise() - model.mean.transpose()) * model.basis.transpose();
    block = block * inv_scale.asDiagonal();
    if (options.renormalize) {
      for (Eigen::Index r = 0; r < len; ++r) {
        const double norm = block.row(r).norm();
        if (norm > 0.0) {
          block.row(r) /= norm;
        } else {
          zero_row[static_cast<std::size_t>(start + r)] = 1;
        }
      }
    }
    out.middleRows(start, len) = block;
  });

  if (options.renormalize) {
    std::string listing;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < zero_row.size(); ++i) {
      if (!zero_row[i]) continue;
      if (zeros++ > 0) listing += ",";
      listing += i < row_ids.size() ? row_ids[i] : std::to_string(i);
    }
    if (zeros > 0) {
      throw DomainError("pca apply: " + std::to_string(zeros) + " row(s) project to zero and cannot be renormalized: " +
                        listing);
    }
  }
  return out;
}

namespace {

constexpr std::string_view kPcaMagic = "PCA1";

}  // namespace

std::string encode_projection(const ProjectionModel& model) {
  model.validate();
  std::string out(kPcaMagic);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(model.in_dim()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(model.out_dim()));
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) binary::put<double>(out, model.mean[i]);
  for (Eigen::Index r = 0; r < model.basis.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c) binary::put<double>(out, model.basis(r, c));
  }
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) binary::put<double>(out, model.eigenvalues[i]);
  return out;
}

ProjectionModel decode_projection(std::string_view bytes) {
  if (bytes.substr(0, 4) != kPcaMagic) throw FormatError("bad PCA1 magic");
  binary::Reader in(bytes.substr(4));
  const auto in_dim = in.get<std::uint32_t>();
  const auto out_dim = in.get<std::uint32_t>();
  if (in_dim == 0 || out_dim == 0 || out_dim > in_dim) throw FormatError("bad PCA1 dimensions");
  const std::size_t expected = (static_cast<std::size_t>(in_dim) * (out_dim + 1) + out_dim) * 8;
  if (in.remaining() < expected) throw IoError("truncated PCA1 payload");
  if (in.remaining() > expected) throw FormatError("trailing bytes after PCA1 payload");
  ProjectionModel model;
  model.mean.resize(in_dim);
  model.basis.resize(out_dim, in_dim);
  model.eigenvalues.resize(out_dim);
  for (std::uint32_t i = 0; i < in_dim; ++i) model.mean[i] = in.get<double>();
  for (std::uint32_t r = 0; r < out_dim; ++r) {
    for (std::uint32_t c = 0; c < in_dim; ++c) model.basis(r, c) = in.get<double>();
  }
  for (std::uint32_t i = 0; i < out_dim; ++i) model.eigenvalues[i] = in.get<double>();
  model.validate();
  return model;
}

void save_projection(const ProjectionModel& model, const std::string& path) {
  binary::write_file(path, encode_projection(model));
}

ProjectionModel load_projection(const std::string& path) {
  return decode_projection(binary::read_file(path));
}

}  // namespace icd
