#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "skc/sdpi.hpp"

using namespace skc;
using Eigen::MatrixXd;

namespace {

JointXY dsbs(double eps) {
  JointXY j;
  j.p = MatrixXd{{0.5 * (1.0 - eps), 0.5 * eps}, {0.5 * eps, 0.5 * (1.0 - eps)}};
  return j;
}

// X ~ Bern(1/2), Y = BSC(exy)(X), Z = BSC(a)(Y) with a chosen so the X->Z
// marginal is BSC(exz).
DiscreteJoint cascade(double exy, double exz) {
  const double a = (exz - exy) / (1.0 - 2.0 * exy);
  DiscreteJoint j;
  j.nx = j.ny = j.nz = 2;
  j.p.resize(8);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        const double py = y != x ? exy : 1.0 - exy;
        const double pz = z != y ? a : 1.0 - a;
        j.p[(static_cast<std::size_t>(x) * 2 + y) * 2 + z] = 0.5 * py * pz;
      }
  return j;
}

}  // namespace

TEST_CASE("pmf validation") {
  JointXY j = dsbs(0.1);
  CHECK_NOTHROW(validate(j));
  j.p(0, 0) = -0.1;
  CHECK_THROWS_AS(validate(j), ValidationError);
  j = dsbs(0.1);
  j.p(1, 1) += 0.1;  // no longer sums to 1
  CHECK_THROWS_AS(validate(j), ValidationError);
  // A silent input symbol leaves the conditional channel undefined.
  JointXY dead;
  dead.p = MatrixXd{{0.5, 0.5}, {0.0, 0.0}};
  CHECK_THROWS_AS(validate(dead), DegenerateChannel);
}

TEST_CASE("DSBS contraction coefficient (certified ascent)") {
  const SdpiEstimate est = s_star_no_eve(dsbs(0.1));
  // Closed form (1 - 2 eps)^2 = 0.64; the ascent certifies from below.
  CHECK(est.s_lower <= 0.64 + 1e-9);
  CHECK(est.s_lower >= 0.6399);
  REQUIRE(est.argmax_q.size() == 2);
  CHECK(est.argmax_q.minCoeff() >= 0.0);
  CHECK(est.argmax_q.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(eta_from_s(0.64) == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("constant-channel infimum and pole handling") {
  // Y independent of X: ratio identically 0.
  JointXY indep;
  indep.p = MatrixXd{{0.25, 0.25}, {0.25, 0.25}};
  const SdpiEstimate lo = s_lower_constant(indep);
  CHECK(lo.s_lower <= 1e-6);
  CHECK(lo.s_lower >= -1e-12);

  CHECK_THROWS_AS(eta_from_s(1.0), PoleAtOne);
  CHECK(eta_from_s(0.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bernoulli cascade closed form, rational and double") {
  using rat = boost::rational<long long>;
  CHECK(eta_bernoulli(rat(1, 10), rat(1, 4)) == rat(13, 12));
  CHECK(eta_bernoulli(0.1, 0.25) == doctest::Approx(13.0 / 12.0).epsilon(1e-12));
  CHECK(eta_bernoulli(rat(1, 10), rat(1, 10)) == rat(0));
  CHECK_THROWS_AS(eta_bernoulli(0.3, 0.1), OrderViolation);
  CHECK_THROWS_AS(eta_bernoulli(0.0, 0.3), PoleAtOne);
  CHECK_THROWS_AS(eta_bernoulli(0.1, 0.6), OrderViolation);
}

TEST_CASE("degradedness detection") {
  const DiscreteJoint j = cascade(0.1, 0.25);
  const DegradednessCheck dc = check_degradedness(j);
  CHECK(dc.degraded);
  CHECK(dc.residual <= 1e-9);
  REQUIRE(dc.w_zy.rows() == 2);
  CHECK(dc.w_zy(0, 0) == doctest::Approx(0.8125).epsilon(1e-6));
  CHECK(dc.w_zy(0, 1) == doctest::Approx(0.1875).epsilon(1e-6));

  // Swap receiver and eavesdropper: the reverse direction is not degraded.
  DiscreteJoint rev;
  rev.nx = rev.ny = rev.nz = 2;
  rev.p.resize(8);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        rev.p[(static_cast<std::size_t>(x) * 2 + y) * 2 + z] =
            j.p[(static_cast<std::size_t>(x) * 2 + z) * 2 + y];
  CHECK_FALSE(check_degradedness(rev).degraded);
  CHECK_THROWS_AS(s_star_degraded(rev), NotDegraded);
}

TEST_CASE("degraded ratio supremum reaches the closed form") {
  const SdpiEstimate est = s_star_degraded(cascade(0.1, 0.25));
  const double s = std::isfinite(est.s_extrapolated) ? est.s_extrapolated : est.s_lower;
  CHECK(eta_from_s(s) == doctest::Approx(13.0 / 12.0).epsilon(1e-4));
  // The raw certified value never exceeds the supremum.
  CHECK(est.s_lower <= 13.0 / 25.0 + 1e-6);  // s* = eta/(1+eta) = 13/25
}

TEST_CASE("tensorization of the binary pair") {
  const TensorizationReport rep = tensorization_check(dsbs(0.1), dsbs(0.3));
  CHECK(rep.pass);
  CHECK(rep.gap <= 1e-3);
  CHECK(rep.s_first >= rep.s_second - 1e-9);
  CHECK(rep.s_product <= std::max(rep.s_first, rep.s_second) + 1e-3);
  CHECK(rep.embedded_ratio >= std::max(rep.s_first, rep.s_second) - 1e-3);
}

TEST_CASE("variational ratio for an explicit auxiliary") {
  const DiscreteJoint j = cascade(0.1, 0.25);
  // V = X exactly: Q_VX = diag(P_X).
  MatrixXd q = MatrixXd::Zero(2, 2);
  q(0, 0) = q(1, 1) = 0.5;
  CHECK(e18_ratio(j, q) == doctest::Approx(0.42190528815015976).epsilon(1e-12));

  MatrixXd bad = MatrixXd::Constant(2, 2, 0.3);
  CHECK_THROWS_AS(e18_ratio(j, bad), ValidationError);
  CHECK_THROWS_AS(e18_ratio(j, MatrixXd::Constant(5, 2, 0.1)), ValidationError);
}
