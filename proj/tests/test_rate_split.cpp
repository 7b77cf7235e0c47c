#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "skc/rate_split.hpp"

using namespace skc;

namespace {
const ProductGaussSource kSrc = ProductGaussSource::from_betas({2.0, 1.0, 0.5});
}

TEST_CASE("product curve point at mu=0.8 (frozen)") {
  const CurvePoint p = product_curve_point(kSrc, 0.8);
  CHECK(p.r == doctest::Approx(0.26162407188227382).epsilon(1e-14));
  CHECK(p.R == doctest::Approx(0.30809306971190847).epsilon(1e-14));
  // beta = 0.5 component inactive at mu = 0.8.
  REQUIRE(p.alloc.r.size() == 3);
  CHECK(p.alloc.r[2] == 0.0);
  CHECK(p.alloc.r[0] > p.alloc.r[1]);

  const CurvePoint top = product_curve_point(kSrc, 2.5);
  CHECK(top.r == 0.0);
  CHECK(top.R == 0.0);
  CHECK_THROWS_AS(product_curve_point(kSrc, 0.0), NonpositiveMu);
}

TEST_CASE("split_for_budget inverts the slope map") {
  for (double budget : {0.2, 0.5, 1.0}) {
    const SplitResult s = split_for_budget(kSrc, budget);
    REQUIRE_FALSE(s.degenerate);
    CHECK(std::abs(s.alloc.r_total - budget) <= 1e-9);
    // Slope matching across active components (KKT).
    for (std::size_t i = 0; i < s.alloc.r.size(); ++i) {
      if (s.alloc.r[i] <= 1e-6) continue;
      CHECK(oracle::key_comm_slope(kSrc.components[i], s.alloc.r[i]) ==
            doctest::Approx(s.mu).epsilon(1e-6));
    }
    // Never beaten by exhaustive allocation.
    const double brute = oracle::brute_force_split({2.0, 1.0, 0.5}, budget, 1e-3);
    CHECK(s.R >= brute - 1e-9);
    CHECK(s.R == doctest::Approx(brute).epsilon(1e-3));
  }
}

TEST_CASE("split edge cases") {
  CHECK_THROWS_AS(split_for_budget(kSrc, -0.1), NegativeRate);

  const SplitResult zero = split_for_budget(kSrc, 0.0);
  CHECK(zero.R == 0.0);
  CHECK(zero.alloc.r_total == 0.0);

  // All-nonpositive source cannot use any budget.
  const SplitResult dead = split_for_budget(ProductGaussSource::from_betas({-1.0, 0.0}), 0.7);
  CHECK(dead.degenerate);
  CHECK(std::isnan(dead.mu));
  CHECK(dead.R == 0.0);

  // Budget far beyond the bracket: the floor point is returned and the
  // achieved total reported honestly.
  const SplitResult big = split_for_budget(kSrc, 1e6);
  CHECK(big.alloc.r_total < 1e6);
  CHECK(big.R <= 0.5 * (std::log(3.0) + std::log(2.0) + std::log(1.5)) + 1e-9);
}

TEST_CASE("eta_product is the top positive efficiency") {
  CHECK(eta_product(kSrc) == 2.0);
  CHECK(eta_product(ProductGaussSource::from_betas({-3.0, -0.5})) == 0.0);
  CHECK(eta_product(ProductGaussSource{}) == 0.0);
}

TEST_CASE("more communication never hurts (monotone R)") {
  double prev = -1.0;
  for (double budget = 0.0; budget <= 2.0; budget += 0.05) {
    const SplitResult s = split_for_budget(kSrc, budget);
    CHECK(s.R >= prev - 1e-12);
    prev = s.R;
  }
}
