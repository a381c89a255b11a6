#include <catch_amalgamated.hpp>

#include <random>

#include "seagrass/error.hpp"
#include "seagrass/evaluation/roc.hpp"
#include "seagrass/rng.hpp"
#include "support/oracles.hpp"

using namespace seagrass;
using namespace seagrass::evaluation;
using Catch::Matchers::WithinAbs;

namespace {

struct Fixture {
  std::vector<ProbabilityMap> probs;
  std::vector<LabelMap> truths;
};

// Labels are balanced coin flips; probabilities lean toward the label by `signal`.
Fixture random_fixture(std::size_t maps, std::size_t h, std::size_t w, double signal, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Fixture f;
  for (std::size_t m = 0; m < maps; ++m) {
    ProbabilityMap p(h, w);
    LabelMap t(h, w);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      t.classes[i] = u(rng) < 0.5 ? 1 : 0;
      const double noise = u(rng);
      p.values[i] = static_cast<float>((1.0 - signal) * noise + signal * t.classes[i]);
    }
    f.probs.push_back(std::move(p));
    f.truths.push_back(std::move(t));
  }
  return f;
}

}  // namespace

TEST_CASE("perfect separation gives AUC 1") {
  ProbabilityMap p(8, 8);
  LabelMap t(8, 8);
  for (std::size_t i = 0; i < 64; ++i) {
    t.classes[i] = i % 3 == 0;
    p.values[i] = t.classes[i] ? 0.95f : 0.05f;
  }
  const auto curve = roc(ThresholdGrid::standard(), p, t);
  REQUIRE(curve.points.size() == 9);
  for (const auto& pt : curve.points) {
    CHECK(pt.fall_out == 0.0);
    CHECK(pt.recall == 1.0);
  }
  CHECK(curve.auc == 1.0);
}

TEST_CASE("uniform noise gives chance-level AUC") {
  const auto f = random_fixture(4, 200, 160, 0.0, 17);  // 128000 pixels
  const auto curve = roc(ThresholdGrid::standard(), f.probs, f.truths);
  CHECK_THAT(curve.auc, WithinAbs(0.5, 0.02));
}

TEST_CASE("AUC matches the brute-force trapezoid exactly") {
  const auto grid = ThresholdGrid::standard();
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto f = random_fixture(3, 20, 30, 0.3 + 0.1 * static_cast<double>(s), s);
    const auto curve = roc(grid, f.probs, f.truths);
    CHECK(curve.auc == testing::brute_force_auc(grid.thresholds, f.probs, f.truths));
  }
}

TEST_CASE("ROC coordinates are monotone in the threshold") {
  const auto grid = ThresholdGrid::standard();
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto f = random_fixture(1, 12, 12, 0.5 * static_cast<double>(s % 3) / 2.0, 1000 + s);
    const auto curve = roc(grid, f.probs, f.truths);
    for (std::size_t j = 0; j + 1 < curve.points.size(); ++j) {
      REQUIRE(curve.points[j].fall_out >= curve.points[j + 1].fall_out);
      REQUIRE(curve.points[j].recall >= curve.points[j + 1].recall);
    }
    REQUIRE((curve.auc >= 0.0 && curve.auc <= 1.0));
  }
}

TEST_CASE("AUC is invariant under a monotone transform at matched operating points") {
  const auto grid = ThresholdGrid::standard();
  const auto f = random_fixture(2, 30, 30, 0.4, 9);
  auto g = [](double p) { return p * p; };
  Fixture squared = f;
  for (auto& m : squared.probs)
    for (auto& v : m.values) v = static_cast<float>(g(v));
  ThresholdGrid moved;
  for (double t : grid.thresholds) moved.thresholds.push_back(g(t));

  const auto a = roc(grid, f.probs, f.truths);
  const auto b = roc(moved, squared.probs, squared.truths);
  CHECK_THAT(b.auc, WithinAbs(a.auc, 1e-12));
}

TEST_CASE("single-class truth is rejected") {
  const ProbabilityMap p(4, 4, 0.3f);
  CHECK_THROWS_AS(roc(ThresholdGrid::standard(), p, LabelMap(4, 4, 0)), ContractViolation);
  CHECK_THROWS_AS(roc(ThresholdGrid::standard(), p, LabelMap(4, 4, 1)), ContractViolation);
  CHECK_THROWS_AS(roc(ThresholdGrid::standard(), p, LabelMap(4, 5, 1)), ContractViolation);
}

TEST_CASE("trapezoid closure") {
  CHECK(trapezoid_auc({}) == 0.5);
  const std::vector<RocPoint> corner{{0.5, 0.0, 1.0}};
  CHECK(trapezoid_auc(corner) == 1.0);
  const std::vector<RocPoint> mid{{0.5, 0.5, 0.5}};
  CHECK(trapezoid_auc(mid) == 0.5);
  const std::vector<RocPoint> knee{{0.5, 0.25, 0.75}};
  CHECK_THAT(trapezoid_auc(knee), WithinAbs(0.75, 1e-15));
}
