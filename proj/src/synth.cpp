#include "icd/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "icd/errors.hpp"
#include "icd/rng.hpp"

namespace icd {

void SynthConfig::validate() const {
  if (dim < 2) throw DomainError("synth: dim must be >= 2");
  if (references < 1 || training < 1 || clusters < 1) throw DomainError("synth: set sizes must be >= 1");
  if (copies > references) throw DomainError("synth: more copies than references");
  if (copies + distractors < 1) throw DomainError("synth: need at least one query");
  if (!(cluster_fraction >= 0.0 && cluster_fraction <= 1.0)) throw DomainError("synth: cluster_fraction outside [0, 1]");
  if (!(cluster_noise >= 0.0 && copy_noise >= 0.0 && distractor_noise >= 0.0)) {
    throw DomainError("synth: noise levels must be >= 0");
  }
}

namespace {

std::string make_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, i);
  return buf;
}

Eigen::VectorXd perturb(Rng& rng, const Eigen::VectorXd& center, double noise) {
  const double per_component = noise / std::sqrt(static_cast<double>(center.size()));
  for (;;) {
    Eigen::VectorXd v = center + per_component * rng.normal_vector(center.size());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace

SyntheticBenchmark generate_benchmark(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::vector<Eigen::VectorXd> centers;
  for (std::size_t k = 0; k < config.clusters; ++k) centers.push_back(rng.unit_vector(config.dim));
  const auto cluster_member = [&](double noise) { return perturb(rng, centers[rng.below(centers.size())], noise); };

  RowMatrix<double> training(static_cast<Eigen::Index>(config.training), config.dim);
  std::vector<std::string> training_ids;
  for (std::size_t i = 0; i < config.training; ++i) {
    training.row(static_cast<Eigen::Index>(i)) = cluster_member(config.cluster_noise).transpose();
    training_ids.push_back(make_id('T', i));
  }

  const auto clustered = static_cast<std::size_t>(std::llround(config.cluster_fraction * static_cast<double>(config.references)));
  RowMatrix<double> references(static_cast<Eigen::Index>(config.references), config.dim);
  std::vector<std::string> reference_ids;
  for (std::size_t i = 0; i < config.references; ++i) {
    const Eigen::VectorXd v = i < clustered ? cluster_member(config.cluster_noise) : rng.unit_vector(config.dim);
    references.row(static_cast<Eigen::Index>(i)) = v.transpose();
    reference_ids.push_back(make_id('R', i));
  }

  // Distinct source references via a partial Fisher-Yates shuffle.
  std::vector<std::size_t> pool(config.references);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < config.copies; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }

  const std::size_t query_count = config.copies + config.distractors;
  RowMatrix<double> queries(static_cast<Eigen::Index>(query_count), config.dim);
  std::vector<std::string> query_ids;
  std::vector<std::pair<std::string, std::string>> gt;
  for (std::size_t i = 0; i < query_count; ++i) {
    query_ids.push_back(make_id('Q', i));
    Eigen::VectorXd v;
    if (i < config.copies) {
      v = perturb(rng, references.row(static_cast<Eigen::Index>(pool[i])).transpose(), config.copy_noise);
      gt.emplace_back(query_ids.back(), reference_ids[pool[i]]);
    } else {
      v = cluster_member(config.distractor_noise);
    }
    queries.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }

  return {EmbeddingSetD(std::move(reference_ids), std::move(references), true),
          EmbeddingSetD(std::move(training_ids), std::move(training), true),
          EmbeddingSetD(std::move(query_ids), std::move(queries), true), GroundTruth(std::move(gt))};
}

}  // namespace icd
