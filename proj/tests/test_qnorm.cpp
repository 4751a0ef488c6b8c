#include <doctest.h>

#include <cmath>

#include "icd/qnorm.hpp"
#include "oracles.hpp"

using namespace icd;

namespace {

EmbeddingSetD unit_rows(std::vector<std::string> ids, const std::vector<Eigen::VectorXd>& rows) {
  EmbeddingSetD::Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].normalized().transpose();
  return EmbeddingSetD(std::move(ids), m, true);
}

Eigen::VectorXd at_angle(double cos_theta) {
  Eigen::VectorXd v(3);
  v << cos_theta, std::sqrt(1 - cos_theta * cos_theta), 0.0;
  return v;
}

Eigen::VectorXd e0() { return Eigen::Vector3d(1, 0, 0); }

}  // namespace

TEST_CASE("mean_top_similarity") {
  SUBCASE("mean of the three best") {
    const auto training = unit_rows({"a", "b", "c", "d"}, {at_angle(0.7), at_angle(0.9), at_angle(0.1), at_angle(0.8)});
    CHECK(mean_top_similarity(e0(), training, 3) == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("self similarity") {
    const auto training = unit_rows({"a", "b"}, {at_angle(0.2), e0()});
    CHECK(mean_top_similarity(e0(), training, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("insufficient training") {
    const auto training = unit_rows({"a"}, {e0()});
    CHECK_THROWS_AS(mean_top_similarity(e0(), training, 3), DomainError);
  }
}

TEST_CASE("normalize_scores") {
  SUBCASE("hand evaluation") {
    const ScoreLists out = normalize_scores({{-0.5}}, {{-0.2, -0.4}}, {1.0, 2});
    CHECK(out[0][0] == doctest::Approx(-0.2).epsilon(1e-15));
  }
  SUBCASE("uses the n best training scores") {
    const ScoreLists out = normalize_scores({{-0.5}}, {{-3.0, -0.4, -0.2}}, {1.0, 2});
    CHECK(out[0][0] == doctest::Approx(-0.2).epsilon(1e-15));
  }
  SUBCASE("alpha zero leaves scores unchanged") {
    const ScoreLists raw{{-0.5, -1.25}, {-2.0}};
    CHECK(normalize_scores(raw, {{-0.1, -0.2}, {-0.3, -0.4}}, {0.0, 2}) == raw);
  }
  SUBCASE("constant shift keeps within-query order") {
    const ScoreLists out = normalize_scores({{-0.5, -0.7, -0.6}}, {{-0.1, -0.3}}, {1.7, 2});
    CHECK(out[0][0] > out[0][2]);
    CHECK(out[0][2] > out[0][1]);
    CHECK(out[0][0] - out[0][1] == doctest::Approx(0.2));
  }
  SUBCASE("too few training scores") {
    CHECK_THROWS_AS(normalize_scores({{-0.5}}, {{-0.2}}, {1.0, 2}), DomainError);
  }
}

TEST_CASE("normalize_method1") {
  SUBCASE("negative mean similarity clamps to a no-op") {
    const auto q = unit_rows({"q"}, {e0()});
    const auto t = unit_rows({"a", "b", "c"}, {at_angle(-0.5), at_angle(-0.6), at_angle(-0.9)});
    const auto out = normalize_method1(q, t, NormalizationConfig::method1());
    CHECK(out.vectors() == q.vectors());
    CHECK_FALSE(out.unit_normalized());
  }
  SUBCASE("C = 0.25 with beta 2 doubles the query") {
    const auto q = unit_rows({"q"}, {e0()});
    const auto t = unit_rows({"a", "b", "c", "d"}, {at_angle(0.25), at_angle(0.25), at_angle(0.25), at_angle(-0.9)});
    const auto out = normalize_method1(q, t, NormalizationConfig::method1());
    CHECK((out.vectors() - 2.0 * q.vectors()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("rejects sets not flagged unit") {
    EmbeddingSetD::Matrix m(1, 3);
    m << 1, 0, 0;
    const auto t = unit_rows({"a", "b", "c"}, {e0(), e0() * 2, at_angle(0.1)});
    CHECK_THROWS_AS(normalize_method1(EmbeddingSetD({"q"}, m), t, NormalizationConfig::method1()), DomainError);
  }
  SUBCASE("config validation") {
    const auto q = unit_rows({"q"}, {e0()});
    const auto t = unit_rows({"a"}, {e0()});
    CHECK_THROWS_AS(normalize_method1(q, t, {0.0, 1, 1}), DomainError);
    CHECK_THROWS_AS(normalize_method1(q, t, {1.0, 2, 1}), DomainError);
    CHECK_THROWS_AS(normalize_method1(q, t, {1.0, 3, 3}), DomainError);
  }
}

TEST_CASE("property: Method 1 affine distance law, ranking and collinearity") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + rng.below(40));
    const auto training = oracle::random_unit_set(rng, 20, dim, 't');
    const auto queries = oracle::random_unit_set(rng, 5, dim, 'q');
    const auto refs = oracle::random_unit_set(rng, 15, dim, 'r');
    const auto config = NormalizationConfig::method1();
    const auto out = normalize_method1(queries, training, config);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const Eigen::VectorXd q = queries.row(i).transpose();
      const Eigen::VectorXd qh = out.row(i).transpose();
      const double delta = displacement(config.beta, mean_top_similarity(q, training, config.n_sim));
      CHECK(cosine(q, qh) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(qh.norm() - (1.0 + delta)) < 1e-12);
      std::vector<std::pair<double, std::size_t>> before, after;
      for (std::size_t j = 0; j < refs.size(); ++j) {
        const double d0 = sq_euclid(q, refs.row(j));
        const double d1 = sq_euclid(qh, refs.row(j));
        CHECK(std::abs(d1 - ((1.0 + delta) * d0 + delta * delta)) < 1e-9);
        before.emplace_back(d0, j);
        after.emplace_back(d1, j);
      }
      std::sort(before.begin(), before.end());
      std::sort(after.begin(), after.end());
      for (std::size_t j = 0; j < refs.size(); ++j) CHECK(before[j].second == after[j].second);
    }
  }
}

TEST_CASE("normalize_method2") {
  SUBCASE("single training point pushes straight away from it") {
    const Eigen::VectorXd t = at_angle(0.6);
    const auto q = unit_rows({"q"}, {e0()});
    const auto training = unit_rows({"t"}, {t});
    const NormalizationConfig config{1.8, 1, 1};
    const auto out = normalize_method2(q, training, config);
    const Eigen::VectorXd qv = e0();
    const Eigen::VectorXd expected = qv + 1.8 * std::sqrt(0.6) * (qv - t) / (qv - t).norm();
    CHECK((out.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out.row(0).transpose() - t).norm() > (qv - t).norm());
  }
  SUBCASE("clamped similarity leaves the query in place") {
    const auto q = unit_rows({"q"}, {e0()});
    const auto training = unit_rows({"a", "b"}, {at_angle(-0.3), at_angle(-0.8)});
    const auto out = normalize_method2(q, training, {1.8, 1, 2});
    CHECK(out.vectors() == q.vectors());
  }
  SUBCASE("self match is skipped in the direction") {
    const Eigen::VectorXd t = at_angle(0.5);
    const auto q = unit_rows({"q"}, {e0()});
    const auto training = unit_rows({"self", "t"}, {e0(), t});
    const auto out = normalize_method2(q, training, {1.0, 1, 2});
    const Eigen::VectorXd qv = e0();
    const Eigen::VectorXd expected = qv + 1.0 * (qv - t) / (qv - t).norm();  // C = 1 from the self match
    CHECK((out.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("only self matches: direction undefined, falls back to Method 1 scaling") {
    // On the unit sphere (q - t).q = 1 - cos > 0, so the mean direction can only vanish
    // when every neighbor coincides with q.
    const auto q = unit_rows({"q"}, {e0()});
    const auto training = unit_rows({"self"}, {e0()});
    const auto out = normalize_method2(q, training, {2.0, 1, 1});
    CHECK((out.row(0).transpose() - 3.0 * e0()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("not enough training rows for n_dir") {
    const auto q = unit_rows({"q"}, {e0()});
    const auto training = unit_rows({"a", "b"}, {at_angle(0.3), at_angle(0.8)});
    CHECK_THROWS_AS(normalize_method2(q, training, NormalizationConfig::method2()), DomainError);
  }
}

TEST_CASE("property: Method 2 displacement and locality") {
  Rng rng(77);
  const auto training = oracle::random_unit_set(rng, 150, 24, 't');
  const auto queries = oracle::random_unit_set(rng, 30, 24, 'q');
  const auto config = NormalizationConfig::method2();
  const auto out = normalize_method2(queries, training, config, 4);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Eigen::VectorXd q = queries.row(i).transpose();
    const double delta = displacement(config.beta, mean_top_similarity(q, training, config.n_sim));
    CHECK(std::abs((out.row(i).transpose() - q).norm() - delta) < 1e-9);
    const Corpus<double> corpus(training, Metric::cosine);
    const auto dir = escape_direction<double>(q, training, corpus.nearest(q, config.n_dir));
    REQUIRE(dir.size() == q.size());
    CHECK(std::abs(dir.norm() - 1.0) < 1e-9);
  }
  const auto subset = queries.select({3, 17});
  const auto out_subset = normalize_method2(subset, training, config, 1);
  CHECK(out_subset.row(0) == out.row(3));
  CHECK(out_subset.row(1) == out.row(17));
}
