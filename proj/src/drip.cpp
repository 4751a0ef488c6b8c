#include "icd/drip.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "icd/errors.hpp"
#include "icd/parallel.hpp"
#include "icd/rng.hpp"

namespace icd {

SyntheticEmbedder::SyntheticEmbedder(Eigen::Index dim, std::uint64_t seed, double sigma)
    : dim_(dim), seed_(seed), sigma_(sigma) {
  if (dim < 1) throw DomainError("synthetic embedder: dim must be >= 1");
  if (!(sigma >= 0.0)) throw DomainError("synthetic embedder: sigma must be >= 0");
}

Eigen::VectorXd SyntheticEmbedder::embed(std::string_view sample_id,
                                         std::optional<std::uint64_t> augmentation_seed) const {
  const std::uint64_t sample_seed = derive_seed(seed_, sample_id);
  Eigen::VectorXd centroid = Rng(sample_seed).unit_vector(dim_);
  if (!augmentation_seed) return centroid;
  Rng noise(derive_seed(sample_seed, *augmentation_seed, 1));
  // Per-component sigma / sqrt(dim): the noise norm is about sigma in any dimension.
  Eigen::VectorXd v = centroid + (sigma_ / std::sqrt(static_cast<double>(dim_))) * noise.normal_vector(dim_);
  return v / v.norm();
}

Eigen::MatrixXd seed_centroids(const Embedder& embedder, std::span<const std::string> sample_ids,
                               std::size_t num_augmentations, std::uint64_t seed_base) {
  if (num_augmentations < 1) throw DomainError("seed_centroids: num_augmentations must be >= 1");
  std::unordered_set<std::string_view> seen;
  for (const auto& id : sample_ids) {
    if (!seen.insert(id).second) throw DomainError("seed_centroids: duplicate sample id '" + id + "'");
  }
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(sample_ids.size()), embedder.dim());
  for (std::size_t i = 0; i < sample_ids.size(); ++i) {
    Eigen::VectorXd sum = embedder.embed(sample_ids[i], std::nullopt);
    for (std::size_t a = 0; a < num_augmentations; ++a) sum += embedder.embed(sample_ids[i], seed_base + a + 1);
    const double norm = sum.norm();
    if (!(norm > 1e-12)) throw SeedingError("mean embedding of '" + sample_ids[i] + "' has zero norm");
    rows.row(static_cast<Eigen::Index>(i)) = (sum / norm).transpose();
  }
  return rows;
}

void DripSchedule::validate() const {
  if (initial_classes < 1) throw DomainError("drip: initial_classes must be >= 1");
  if (initial_classes > target_classes) throw DomainError("drip: initial_classes > target_classes");
  if (!(growth_factor > 1.0) || !std::isfinite(growth_factor)) throw DomainError("drip: growth_factor must be > 1");
  if (!(loss_threshold > 0.0)) throw DomainError("drip: loss_threshold must be > 0");
  if (steps_per_stage < 1) throw DomainError("drip: steps_per_stage must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("drip: learning_rate must be > 0");
  if (num_augmentations < 1) throw DomainError("drip: num_augmentations must be >= 1");
}

std::vector<std::size_t> DripSchedule::stage_sizes() const {
  validate();
  std::vector<std::size_t> sizes{initial_classes};
  while (sizes.back() < target_classes) {
    const auto grown = static_cast<std::size_t>(std::llround(growth_factor * static_cast<double>(sizes.back())));
    sizes.push_back(std::min(std::max(grown, sizes.back() + 1), target_classes));
  }
  return sizes;
}

namespace {

constexpr std::size_t kChunk = 16;

struct BatchResult {
  double loss = 0.0;
  Eigen::MatrixXd d_centroids;
};

std::uint64_t stage_step_key(std::size_t stage, std::size_t step) {
  return (static_cast<std::uint64_t>(stage) << 32) | static_cast<std::uint64_t>(step);
}

/// Mean loss (and optionally mean centroid gradient) over one batch. Samples
/// are summed in fixed chunks, so the result does not depend on `threads`.
BatchResult evaluate_batch(const ArcFaceHead& head, const std::vector<Eigen::VectorXd>& batch, bool with_grad,
                           unsigned threads) {
  const std::size_t n = batch.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<BatchResult> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    BatchResult& acc = partial[c];
    if (with_grad) acc.d_centroids = Eigen::MatrixXd::Zero(head.num_classes(), head.embed_dim());
    for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
      const auto target = static_cast<Eigen::Index>(i);
      if (with_grad) {
        const ArcFaceGradient g = arcface_grad(head, batch[i], target);
        acc.loss += g.loss;
        acc.d_centroids += g.d_centroids;
      } else {
        acc.loss += arcface_loss(head, batch[i], target);
      }
    }
  });
  BatchResult total;
  if (with_grad) total.d_centroids = Eigen::MatrixXd::Zero(head.num_classes(), head.embed_dim());
  for (const auto& p : partial) {
    total.loss += p.loss;
    if (with_grad) total.d_centroids += p.d_centroids;
  }
  total.loss /= static_cast<double>(n);
  if (with_grad) total.d_centroids /= static_cast<double>(n);
  return total;
}

void normalize_rows(Eigen::MatrixXd& m) { m.rowwise().normalize(); }

}  // namespace

DripResult drip_train(const Embedder& embedder, std::span<const std::string> sample_ids, const DripSchedule& schedule,
                      std::uint64_t rng_seed, unsigned threads) {
  const auto sizes = schedule.stage_sizes();
  if (sample_ids.size() < schedule.target_classes) {
    throw DomainError("drip: " + std::to_string(sample_ids.size()) + " samples for " +
                      std::to_string(schedule.target_classes) + " target classes");
  }

  DripResult result;
  result.head.margin = schedule.margin;
  result.head.scale = schedule.scale;
  Eigen::MatrixXd& w = result.head.centroids;
  const Eigen::Index dim = embedder.dim();

  for (std::size_t stage = 0; stage < sizes.size(); ++stage) {
    const std::size_t classes = sizes[stage];
    const std::size_t keep = schedule.reseed_all ? 0 : static_cast<std::size_t>(w.rows());
    const std::uint64_t seed_base = derive_seed(derive_seed(rng_seed, "seed-centroids"), stage);
    Eigen::MatrixXd next(static_cast<Eigen::Index>(classes), dim);
    if (keep > 0) next.topRows(static_cast<Eigen::Index>(keep)) = w;
    next.bottomRows(static_cast<Eigen::Index>(classes - keep)) =
        seed_centroids(embedder, sample_ids.subspan(keep, classes - keep), schedule.num_augmentations, seed_base);
    w = std::move(next);
    result.head.validate();

    StageReport report;
    report.stage = stage;
    report.classes = classes;
    for (std::size_t step = 0; step < schedule.steps_per_stage; ++step) {
      std::vector<Eigen::VectorXd> batch(classes);
      const std::uint64_t batch_seed = derive_seed(rng_seed, stage_step_key(stage, step), 2);
      parallel_for(classes, threads, [&](std::size_t i) {
        batch[i] = embedder.embed(sample_ids[i], derive_seed(batch_seed, i, 3));
      });

      BatchResult r;
      try {
        r = evaluate_batch(result.head, batch, true, threads);
      } catch (const DomainError& e) {
        throw TrainingError("stage " + std::to_string(stage) + " step " + std::to_string(step) + ": " + e.what());
      }
      if (!std::isfinite(r.loss)) {
        throw TrainingError("non-finite loss at stage " + std::to_string(stage) + " (" + std::to_string(classes) +
                            " classes) step " + std::to_string(step));
      }
      if (step == 0) {
        report.opening_loss = r.loss;
        ArcFaceHead random_head{Eigen::MatrixXd(w.rows(), w.cols()), schedule.margin, schedule.scale};
        Rng rng(derive_seed(derive_seed(rng_seed, "random-init"), stage));
        for (Eigen::Index j = 0; j < w.rows(); ++j) random_head.centroids.row(j) = rng.unit_vector(dim).transpose();
        report.random_init_loss = evaluate_batch(random_head, batch, false, threads).loss;
      }
      result.trajectory.push_back({stage, step, r.loss});
      report.steps = step + 1;
      report.final_loss = r.loss;
      if (r.loss < schedule.loss_threshold) {
        report.converged = true;
        break;
      }
      w -= schedule.learning_rate * r.d_centroids;
      normalize_rows(w);
    }
    result.stages.push_back(report);
  }
  return result;
}

void write_trajectory(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out) {
  out << "stage,step,loss\n";
  char buf[64];
  for (const auto& p : trajectory) {
    std::snprintf(buf, sizeof buf, "%.9g", p.loss);
    out << p.stage << ',' << p.step << ',' << buf << '\n';
  }
}

}  // namespace icd
