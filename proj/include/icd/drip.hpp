#ifndef ICD_DRIP_HPP
#define ICD_DRIP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icd/arcface.hpp"

namespace icd {

/// Deterministic image-to-embedding map standing in for a trained backbone.
/// No seed means the un-augmented sample.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::VectorXd embed(std::string_view sample_id, std::optional<std::uint64_t> augmentation_seed) const = 0;
};

/// Each sample owns a uniform random unit centroid; an augmentation returns
/// normalize(centroid + sigma * n) where n is isotropic gaussian with E|n|^2 = 1,
/// keyed on (sample, seed). sigma is then roughly the angular noise in radians.
class SyntheticEmbedder final : public Embedder {
 public:
  SyntheticEmbedder(Eigen::Index dim, std::uint64_t seed, double sigma = 0.1);

  Eigen::Index dim() const override { return dim_; }
  Eigen::VectorXd embed(std::string_view sample_id, std::optional<std::uint64_t> augmentation_seed) const override;

 private:
  Eigen::Index dim_;
  std::uint64_t seed_;
  double sigma_;
};

/// One centroid row per sample: the L2-normalized mean of the clean embedding
/// and `num_augmentations` augmented ones. Augmentation seeds derive from `seed_base`.
Eigen::MatrixXd seed_centroids(const Embedder& embedder, std::span<const std::string> sample_ids,
                               std::size_t num_augmentations, std::uint64_t seed_base = 0);

struct DripSchedule {
  std::size_t initial_classes = 64;
  double growth_factor = 2.0;
  std::size_t target_classes = 256;
  double loss_threshold = 1.0;
  std::size_t steps_per_stage = 200;
  double learning_rate = 0.05;
  std::size_t num_augmentations = 4;
  bool reseed_all = false;  // re-seed retained classes too, instead of keeping trained rows
  double margin = 0.4;
  double scale = 40.0;

  void validate() const;

  /// Class count of every stage: c0 = initial, c_{t+1} = min(round(g * c_t), target),
  /// always growing by at least one class.
  std::vector<std::size_t> stage_sizes() const;
};

struct StageReport {
  std::size_t stage = 0;
  std::size_t classes = 0;
  std::size_t steps = 0;
  double opening_loss = 0.0;      // seeded head, first batch of the stage
  double random_init_loss = 0.0;  // random unit rows, same batch
  double final_loss = 0.0;
  bool converged = false;
};

struct TrajectoryPoint {
  std::size_t stage;
  std::size_t step;
  double loss;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct DripResult {
  ArcFaceHead head;
  std::vector<StageReport> stages;
  std::vector<TrajectoryPoint> trajectory;
};

/// Staged ArcFace training of the centroid matrix only (the embedder is frozen).
/// Class i is sample_ids[i]. Fully determined by the inputs and `rng_seed`.
DripResult drip_train(const Embedder& embedder, std::span<const std::string> sample_ids, const DripSchedule& schedule,
                      std::uint64_t rng_seed, unsigned threads = 0);

/// CSV `stage,step,loss`.
void write_trajectory(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out);

}  // namespace icd

#endif  // ICD_DRIP_HPP
