#include <doctest.h>

#include <sstream>

#include "icd/drip.hpp"
#include "oracles.hpp"

using namespace icd;

namespace {

/// Ignores augmentation seeds: every call returns the clean embedding.
class CleanEmbedder final : public Embedder {
 public:
  explicit CleanEmbedder(Eigen::Index dim) : inner_(dim, 5, 0.0) {}
  Eigen::Index dim() const override { return inner_.dim(); }
  Eigen::VectorXd embed(std::string_view id, std::optional<std::uint64_t>) const override {
    return inner_.embed(id, std::nullopt);
  }

 private:
  SyntheticEmbedder inner_;
};

/// Augmentations +-v around a fixed clean direction.
class MirrorEmbedder final : public Embedder {
 public:
  Eigen::Index dim() const override { return 3; }
  Eigen::VectorXd embed(std::string_view, std::optional<std::uint64_t> seed) const override {
    if (!seed) return Eigen::Vector3d(1, 0, 0);
    const double side = (*seed % 2 == 0) ? 1.0 : -1.0;
    return Eigen::Vector3d(1, side, 0).normalized();
  }
};

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("S" + std::to_string(i));
  return ids;
}

}  // namespace

TEST_CASE("synthetic embedder") {
  const SyntheticEmbedder emb(32, 1);
  const auto clean = emb.embed("a", std::nullopt);
  CHECK(std::abs(clean.norm() - 1.0) < 1e-12);
  CHECK(emb.embed("a", std::nullopt) == clean);
  CHECK(emb.embed("a", 7) == emb.embed("a", 7));
  CHECK(emb.embed("a", 7) != emb.embed("a", 8));
  CHECK(emb.embed("b", std::nullopt) != clean);
  CHECK(std::abs(emb.embed("a", 7).norm() - 1.0) < 1e-12);
  CHECK(emb.embed("a", 7).dot(clean) > 0.98);
}

TEST_CASE("seed_centroids") {
  const auto ids = make_ids(10);
  SUBCASE("seed-insensitive embedder yields the embedding itself") {
    const CleanEmbedder emb(16);
    const Eigen::MatrixXd w = seed_centroids(emb, ids, 4);
    for (Eigen::Index i = 0; i < 10; ++i) {
      CHECK((w.row(i).transpose() - emb.embed(ids[static_cast<std::size_t>(i)], std::nullopt)).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("symmetric augmentations average onto the clean direction") {
    const MirrorEmbedder emb;
    const Eigen::MatrixXd w = seed_centroids(emb, std::vector<std::string>{"x"}, 4);
    CHECK((w.row(0).transpose() - Eigen::Vector3d(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("rows are unit and deterministic") {
    const SyntheticEmbedder emb(24, 3);
    const Eigen::MatrixXd a = seed_centroids(emb, ids, 4, 11);
    CHECK((a.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(a == seed_centroids(emb, ids, 4, 11));
    CHECK(a != seed_centroids(emb, ids, 4, 12));
  }
  SUBCASE("duplicate ids rejected") {
    const SyntheticEmbedder emb(4, 3);
    CHECK_THROWS_AS(seed_centroids(emb, std::vector<std::string>{"a", "a"}, 4), DomainError);
  }
}

TEST_CASE("drip schedule stage sizes") {
  DripSchedule s;
  s.initial_classes = 64;
  s.target_classes = 256;
  CHECK(s.stage_sizes() == std::vector<std::size_t>{64, 128, 256});
  s.target_classes = 300;
  CHECK(s.stage_sizes() == std::vector<std::size_t>{64, 128, 256, 300});
  s.initial_classes = 10;
  s.target_classes = 13;
  s.growth_factor = 1.01;
  CHECK(s.stage_sizes() == std::vector<std::size_t>{10, 11, 12, 13});
  s.initial_classes = 20;
  CHECK_THROWS_AS(s.stage_sizes(), DomainError);
}

TEST_CASE("drip_train") {
  const SyntheticEmbedder emb(32, 17);
  const auto ids = make_ids(64);
  DripSchedule s;
  s.initial_classes = 16;
  s.target_classes = 64;
  s.steps_per_stage = 30;

  SUBCASE("stages grow and the final head covers the target") {
    const auto r = drip_train(emb, ids, s, 5);
    REQUIRE(r.stages.size() == 3);
    CHECK(r.stages[0].classes == 16);
    CHECK(r.stages[1].classes == 32);
    CHECK(r.stages[2].classes == 64);
    CHECK(r.head.num_classes() == 64);
    CHECK_NOTHROW(r.head.validate());
    for (const auto& st : r.stages) CHECK(st.opening_loss < st.random_init_loss);
  }
  SUBCASE("deterministic and independent of thread count") {
    const auto a = drip_train(emb, ids, s, 5, 1);
    const auto b = drip_train(emb, ids, s, 5, 4);
    CHECK(a.trajectory == b.trajectory);
    CHECK(a.head.centroids == b.head.centroids);
    const auto c = drip_train(emb, ids, s, 6, 1);
    CHECK_FALSE(a.trajectory == c.trajectory);
  }
  SUBCASE("degenerate schedule is one stage from seeded rows") {
    s.initial_classes = 64;
    s.steps_per_stage = 1;
    const auto r = drip_train(emb, ids, s, 5);
    REQUIRE(r.stages.size() == 1);
    CHECK(r.trajectory.size() == 1);
    // One step either converged (no update) or applied one update, and the
    // opening loss is that of the seeded matrix.
    ArcFaceHead seeded{seed_centroids(emb, ids, 4, derive_seed(derive_seed(5, "seed-centroids"), 0)), s.margin, s.scale};
    CHECK(r.stages[0].opening_loss > 0.0);
    CHECK(r.stages[0].opening_loss < r.stages[0].random_init_loss);
    CHECK_NOTHROW(seeded.validate());
  }
  SUBCASE("retained rows are kept unless reseed_all") {
    s.steps_per_stage = 5;
    s.loss_threshold = 1e-9;
    s.target_classes = 32;
    const auto kept = drip_train(emb, ids, s, 5);
    s.reseed_all = true;
    const auto reseeded = drip_train(emb, ids, s, 5);
    // Stage 0 is identical; stage 1 opens differently because the first 16 rows differ.
    CHECK(kept.stages[0].final_loss == reseeded.stages[0].final_loss);
    CHECK(kept.stages[1].opening_loss != reseeded.stages[1].opening_loss);
  }
  SUBCASE("too few samples") {
    s.target_classes = 65;
    CHECK_THROWS_AS(drip_train(emb, ids, s, 5), DomainError);
  }
}

TEST_CASE("drip_train reduces loss when seeding alone is not enough") {
  // Heavy noise in few dimensions: seeded rows start above threshold.
  const SyntheticEmbedder emb(8, 17, 0.6);
  DripSchedule s;
  s.initial_classes = 16;
  s.target_classes = 16;
  s.steps_per_stage = 200;
  const auto r = drip_train(emb, make_ids(16), s, 5);
  REQUIRE(r.stages.size() == 1);
  CHECK(r.stages[0].opening_loss > s.loss_threshold);
  CHECK(r.stages[0].converged);
  CHECK(r.stages[0].final_loss < r.stages[0].opening_loss);
}

TEST_CASE("trajectory CSV") {
  std::ostringstream out;
  write_trajectory({{0, 0, 3.5}, {0, 1, 0.25}, {1, 0, 1.0 / 3.0}}, out);
  CHECK(out.str() == "stage,step,loss\n0,0,3.5\n0,1,0.25\n1,0,0.333333333\n");
}
