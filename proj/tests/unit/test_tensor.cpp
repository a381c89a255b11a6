#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "seagrass/error.hpp"
#include "seagrass/numerics/tensor.hpp"

using seagrass::ContractViolation;
using seagrass::numerics::Shape;
using seagrass::numerics::Tensor;

TEST_CASE("shape counts and equality") {
  constexpr Shape s{2, 3, 4, 5};
  STATIC_REQUIRE(s.count() == 120);
  STATIC_REQUIRE(s.plane() == 20);
  CHECK(s == Shape{2, 3, 4, 5});
  CHECK_FALSE(s == Shape{2, 3, 5, 4});
  CHECK(seagrass::numerics::to_string(s) == "2x3x4x5");
}

TEST_CASE("tensor layout is NCHW with width fastest") {
  Tensor<float> t({2, 3, 4, 5});
  REQUIRE(t.size() == 120);
  CHECK(t.index(0, 0, 0, 1) == 1);
  CHECK(t.index(0, 0, 1, 0) == 5);
  CHECK(t.index(0, 1, 0, 0) == 20);
  CHECK(t.index(1, 0, 0, 0) == 60);
  t(1, 2, 3, 4) = 7.0f;
  CHECK(t[119] == 7.0f);
  CHECK(t.plane(1, 2)[3 * 5 + 4] == 7.0f);
}

TEST_CASE("tensor construction checks the value count") {
  CHECK_THROWS_AS(Tensor<double>({1, 1, 2, 2}, std::vector<double>{1, 2, 3}), ContractViolation);
  Tensor<double> t({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  CHECK(t(0, 0, 1, 0) == 3.0);
}

TEST_CASE("elementwise accumulate, scale, and dot") {
  Tensor<double> a({1, 1, 1, 3}, std::vector<double>{1, 2, 3});
  Tensor<double> b({1, 1, 1, 3}, std::vector<double>{4, 5, 6});
  CHECK(seagrass::numerics::dot(a, b) == 32.0);
  a += b;
  CHECK(a.values() == std::vector<double>{5, 7, 9});
  a *= 2.0;
  CHECK(a.values() == std::vector<double>{10, 14, 18});
  Tensor<double> c({1, 1, 3, 1});
  CHECK_THROWS_AS(a += c, ContractViolation);
  CHECK_THROWS_AS(seagrass::numerics::dot(a, c), ContractViolation);
}

TEST_CASE("cast preserves shape and values") {
  Tensor<double> a({1, 2, 1, 2}, std::vector<double>{0.5, -1.25, 3.0, 4.0});
  const auto f = a.cast<float>();
  CHECK(f.shape() == a.shape());
  CHECK(f[1] == -1.25f);
  CHECK(f.cast<double>().values() == a.values());
}

TEST_CASE("all_finite detects NaN and infinity") {
  Tensor<float> t({1, 1, 2, 2}, 1.0f);
  CHECK(t.all_finite());
  t[2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
  t[2] = std::numeric_limits<float>::infinity();
  CHECK_FALSE(t.all_finite());
  t.fill(0.0f);
  CHECK(t.all_finite());
}
