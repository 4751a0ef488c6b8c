#ifndef ICD_SYNTH_HPP
#define ICD_SYNTH_HPP

#include <cstdint>

#include "icd/embedding_set.hpp"

namespace icd {

/// Shape of the synthetic copy-detection benchmark. Noise levels are the
/// expected L2 norm of the isotropic gaussian added before renormalizing.
struct SynthConfig {
  Eigen::Index dim = 64;
  std::size_t references = 2000;
  std::size_t training = 500;
  std::size_t copies = 150;       // queries that are noisy copies of a reference
  std::size_t distractors = 150;  // queries drawn near training-cluster mass
  std::size_t clusters = 10;
  double cluster_fraction = 0.5;  // share of references drawn from the clusters
  double cluster_noise = 1.0;
  double copy_noise = 0.9;
  double distractor_noise = 0.9;

  void validate() const;
};

inline constexpr std::uint64_t kDefaultSynthSeed = 20211;

struct SyntheticBenchmark {
  EmbeddingSetD references;
  EmbeddingSetD training;
  EmbeddingSetD queries;  // copies first, then distractors
  GroundTruth ground_truth;
};

/// Unit-normalized reference, training and query sets plus the copy ground truth.
SyntheticBenchmark generate_benchmark(const SynthConfig& config, std::uint64_t seed);

}  // namespace icd

#endif  // ICD_SYNTH_HPP
