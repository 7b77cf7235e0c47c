#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "skc/oneshot.hpp"

using namespace skc;
using Eigen::MatrixXd;

namespace {

// X ~ Bern(1/2); Y, Z are independent BSC(0.1)/BSC(0.3) views of X; the
// auxiliary channel is BSC(0.25); desk-scale codebook M = M1 = M2 = 2.
OneshotInstance desk() {
  OneshotInstance inst;
  inst.source.nx = inst.source.ny = inst.source.nz = 2;
  inst.source.p.resize(8);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        const double py = y != x ? 0.1 : 0.9;
        const double pz = z != x ? 0.3 : 0.7;
        inst.source.p[(static_cast<std::size_t>(x) * 2 + y) * 2 + z] = 0.5 * py * pz;
      }
  inst.channel = MatrixXd{{0.75, 0.25}, {0.25, 0.75}};
  inst.m = inst.m1 = inst.m2 = 2;
  return inst;
}

}  // namespace

TEST_CASE("instance validation") {
  OneshotInstance inst = desk();
  CHECK_NOTHROW(validate(inst));
  inst.channel(0, 0) = 0.8;  // row no longer stochastic
  CHECK_THROWS_AS(validate(inst), ValidationError);
  inst = desk();
  inst.m1 = 0;
  CHECK_THROWS_AS(validate(inst), ValidationError);
  inst = desk();
  inst.channel = MatrixXd{{0.5, 0.5}};
  CHECK_THROWS_AS(validate(inst), LengthMismatch);
}

TEST_CASE("information density atoms") {
  const OneshotInstance inst = desk();
  const MatrixXd pxy = inst.source.xy();
  MatrixXd pux(2, 2);
  for (int u = 0; u < 2; ++u)
    for (int x = 0; x < 2; ++x) pux(u, x) = inst.channel(x, u) * 0.5;
  const auto atoms = info_density_distribution(pux);
  REQUIRE(atoms.size() == 4);
  double mass = 0.0, top = -1e300;
  for (const auto& a : atoms) {
    mass += a.prob;
    top = std::max(top, a.value);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(top == doctest::Approx(0.40546510810816438).epsilon(1e-14));  // ln 3/2

  CHECK_THROWS_AS(info_density_distribution(MatrixXd::Zero(2, 2)), ZeroMarginal);
  CHECK_THROWS_AS(info_density_distribution(MatrixXd::Constant(2, 2, -0.25)),
                  ValidationError);
  (void)pxy;
}

TEST_CASE("bound report on the desk instance (frozen)") {
  const BoundReport rep = compute_bounds(desk());
  CHECK(rep.t1 == doctest::Approx(0.27980393913217549).epsilon(1e-10));
  CHECK(rep.t2 == doctest::Approx(0.39570252552613855).epsilon(1e-10));
  CHECK(rep.t3 == doctest::Approx(0.2287491534964487).epsilon(1e-10));
  CHECK(rep.epsilon == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.epsilon_star == doctest::Approx(2.4574983069928975).epsilon(1e-10));
  CHECK(rep.t_star == doctest::Approx(5.4470157005906401).epsilon(1e-10));
  CHECK(rep.mean_error_rhs == doctest::Approx(1.2287491534964488).epsilon(1e-10));
  CHECK(rep.leakage_rhs == doctest::Approx(13.771177226403884).epsilon(1e-10));
  CHECK(rep.mean_leakage_rhs == doctest::Approx(6.8855886132019419).epsilon(1e-10));
  // Internal consistency of the derived fields.
  CHECK(rep.epsilon_star == doctest::Approx(2.0 * (rep.t3 + rep.epsilon)).epsilon(1e-14));
  CHECK(rep.t_star ==
        doctest::Approx(4.0 * (rep.t1 + rep.t2 + 3.0 * rep.t3)).epsilon(1e-14));
  // More codewords only help the covering terms: T1 <= T2 (M*M2 >= M2).
  CHECK(rep.t1 <= rep.t2 + 1e-14);
}

TEST_CASE("user grids: empty is an error, singletons are honored") {
  BoundGrids g;
  g.user_tau = true;
  CHECK_THROWS_AS(compute_bounds(desk(), g), GridEmpty);

  g = BoundGrids{};
  g.tau = {0.5};
  g.user_tau = true;
  const BoundReport rep = compute_bounds(desk(), g);
  // All i_{U;Z} and i_{U;X} atoms sit below 0.5, so the tail terms vanish.
  CHECK(rep.t1 == doctest::Approx(0.5 * std::sqrt(std::exp(0.5) / 4.0)).epsilon(1e-14));
  CHECK(rep.t2 == doctest::Approx(0.5 * std::sqrt(std::exp(0.5) / 2.0)).epsilon(1e-14));
  CHECK(rep.t3 == doctest::Approx(0.5 * std::sqrt(std::exp(0.5) / 8.0)).epsilon(1e-14));

  g = BoundGrids{};
  g.tau = {-1.0};
  g.user_tau = true;
  CHECK_THROWS_AS(compute_bounds(desk(), g), ValidationError);
}

TEST_CASE("codebook system construction") {
  const CodebookSystem sys = build_system(desk(), 42);
  REQUIRE(sys.codebook.size() == 8);
  for (int u : sys.codebook) CHECK((u == 0 || u == 1));
  REQUIRE(sys.enc_weight.rows() == 2);
  REQUIRE(sys.enc_weight.cols() == 8);
  for (int x = 0; x < 2; ++x)
    CHECK(sys.enc_weight.row(x).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sys.enc_weight.minCoeff() >= 0.0);
  REQUIRE(sys.dec_k.size() == 4);
  for (int k : sys.dec_k) CHECK((k == 0 || k == 1));

  // Same seed, same codebook; different seed should change it eventually.
  const CodebookSystem again = build_system(desk(), 42);
  CHECK(again.codebook == sys.codebook);

  OneshotInstance big = desk();
  big.m = 257;
  big.m1 = 257;
  CHECK_THROWS_AS(build_system(big, 1), CapacityExceeded);
}

TEST_CASE("exact enumeration and the Monte Carlo agree") {
  const CodebookSystem sys = build_system(desk(), 7);
  const double pe = exact_error_probability(sys);
  CHECK(pe >= 0.0);
  CHECK(pe <= 1.0);
  const double leak = exact_leakage_nats(sys);
  CHECK(leak >= -1e-12);
  CHECK(leak <= std::log(2.0) + 1e-12);

  const SimReport rep = simulate_system(sys, 20000, ExecMode::Serial);
  CHECK(rep.trials == 20000);
  CHECK(rep.exact_error == pe);
  CHECK(rep.exact_leakage == leak);
  CHECK(std::abs(rep.error_rate - pe) <= 3.0 * rep.ci95_half + 1e-12);

  // Bitwise identical across execution modes.
  const SimReport par = simulate_system(sys, 20000, ExecMode::Parallel);
  CHECK(par.error_rate == rep.error_rate);
  CHECK(par.ci95_half == rep.ci95_half);

  CHECK_THROWS_AS(simulate_system(sys, 0), ValidationError);
}

TEST_CASE("empirical error is near the enumerated value across codebooks") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CodebookSystem sys = build_system(desk(), seed);
    const SimReport rep = simulate_system(sys, 40000);
    worst = std::max(worst,
                     std::abs(rep.error_rate - rep.exact_error) / rep.ci95_half);
  }
  CHECK(worst <= 3.5);
}
