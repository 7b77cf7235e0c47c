#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "skc/vector_model.hpp"

using namespace skc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GaussVectorModel fixed_noncommutative() {
  GaussVectorModel m;
  m.sx = MatrixXd{{1.0, 0.2}, {0.2, 1.0}};
  m.sy = MatrixXd::Identity(2, 2);
  m.sz = MatrixXd{{1.0, 0.1}, {0.1, 1.0}};
  m.sxy = MatrixXd{{0.7, 0.1}, {0.0, 0.6}};
  m.sxz = MatrixXd{{0.4, 0.0}, {0.1, 0.3}};
  return m;
}

std::vector<VectorXd> probe_directions(const GaussVectorModel& m, int extra,
                                       std::uint64_t seed) {
  const CanonicalPair cp = canonical_pair(m);
  const Eigen::Index n = cp.g.rows();
  const MatrixXd eye = MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(eye - cp.h);
  const MatrixXd ih =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> psi(ih * (cp.g - cp.h) * ih);
  std::vector<VectorXd> dirs;
  for (Eigen::Index i = 0; i < n; ++i) dirs.push_back(psi.eigenvectors().col(i));
  std::mt19937_64 g(seed);
  for (int i = 0; i < extra; ++i)
    dirs.push_back(oracle::gauss_matrix(static_cast<int>(n), 1, g).col(0).normalized());
  return dirs;
}

}  // namespace

TEST_CASE("canonical pair reduces to squared correlations for L=1") {
  GaussVectorModel m;
  m.sx = m.sy = m.sz = MatrixXd::Identity(1, 1);
  m.sxy = MatrixXd::Constant(1, 1, 0.8);
  m.sxz = MatrixXd::Constant(1, 1, 0.5);
  const CanonicalPair cp = canonical_pair(m);
  CHECK(cp.g(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(cp.h(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(eta_vector(m) == doctest::Approx(13.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("validation rejects malformed covariance blocks") {
  GaussVectorModel m = fixed_noncommutative();
  CHECK_NOTHROW(validate(m));
  GaussVectorModel bad = m;
  bad.sxy = MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(validate(bad), LengthMismatch);
  bad = m;
  bad.sx(0, 1) = 0.3;  // asymmetric
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = m;
  bad.sxy = MatrixXd{{1.2, 0.0}, {0.0, 1.2}};  // breaks joint PSD
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("fixed non-commutative model (frozen values)") {
  const GaussVectorModel m = fixed_noncommutative();
  const CanonicalPair cp = canonical_pair(m);
  const CommutativityReport rep = is_commutative(cp);
  CHECK_FALSE(rep.commutative);
  CHECK(rep.defect == doctest::Approx(0.0031589029879903717).epsilon(1e-9));
  CHECK(eta_vector(m) == doctest::Approx(0.72575050667838159).epsilon(1e-11));
  CHECK_THROWS_AS(to_product_form(m), NotCommutative);

  const EnhancedCheckReport er = enhanced_model_check(m);
  CHECK(er.s == doctest::Approx(0.42054196355141815).epsilon(1e-11));
  CHECK(er.pass(1e-9));
  CHECK(er.eta_original == doctest::Approx(0.72575050667838159).epsilon(1e-11));
  CHECK(std::abs(er.eta_enhanced - er.eta_original) <= 1e-9);
  CHECK(er.commute_defect <= 1e-9);
  CHECK(er.domination_margin >= -1e-9);
}

TEST_CASE("planted commutative models diagonalize exactly") {
  for (int dim = 2; dim <= 6; ++dim) {
    const oracle::Planted p = oracle::plant_commutative(dim, 1000 + dim);
    CAPTURE(dim);
    REQUIRE_NOTHROW(validate(p.model));
    const CanonicalPair cp = canonical_pair(p.model);
    CHECK(is_commutative(cp).commutative);

    double planted_eta = 0.0;
    for (double b : p.betas) planted_eta = std::max(planted_eta, b);
    CHECK(eta_vector(p.model) == doctest::Approx(planted_eta).epsilon(1e-10));

    const ProductForm pf = to_product_form(p.model);
    REQUIRE(pf.components.size() == static_cast<std::size_t>(dim));
    std::vector<double> want = p.betas;
    std::sort(want.begin(), want.end(), std::greater<>());
    for (int i = 0; i < dim; ++i) {
      CHECK(pf.source.components[static_cast<std::size_t>(i)].beta ==
            doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }

    // The reported transforms actually whiten and decouple the model.
    const MatrixXd wx = pf.tx * p.model.sx * pf.tx.transpose();
    CHECK((wx - MatrixXd::Identity(dim, dim)).norm() <= 1e-9);
    const MatrixXd wxy = pf.tx * p.model.sxy * pf.ty.transpose();
    CHECK((wxy - wxy.diagonal().asDiagonal().toDenseMatrix()).norm() <= 1e-9);
  }
}

TEST_CASE("vector_curve equals the planted product curve") {
  const oracle::Planted p = oracle::plant_commutative(4, 77);
  const std::vector<double> grid = {0.1, 0.3, 0.7, 1.3};
  const auto curve = vector_curve(p.model, grid);
  const ProductGaussSource src = ProductGaussSource::from_betas(p.betas);
  REQUIRE(curve.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CurvePoint want = product_curve_point(src, grid[i]);
    CHECK(curve[i].r == doctest::Approx(want.r).epsilon(1e-10));
    CHECK(curve[i].R == doctest::Approx(want.R).epsilon(1e-10));
  }
}

TEST_CASE("saturated legitimate channel is rejected") {
  GaussVectorModel m;
  m.sx = m.sy = m.sz = MatrixXd::Identity(1, 1);
  m.sxy = MatrixXd::Constant(1, 1, 1.0 - 1e-14);
  m.sxz = MatrixXd::Constant(1, 1, 0.0);
  CHECK_THROWS_AS(eta_vector(m), SaturatedCorrelation);
}

TEST_CASE("rank-deficient receiver block uses the support pseudo-inverse") {
  GaussVectorModel m;
  m.sx = MatrixXd::Identity(2, 2);
  m.sy = MatrixXd::Zero(2, 2);
  m.sy(0, 0) = 1.0;
  m.sz = MatrixXd::Identity(2, 2);
  m.sxy = MatrixXd::Zero(2, 2);
  m.sxy(0, 0) = 0.8;
  m.sxz = 0.5 * MatrixXd::Identity(2, 2);
  const CanonicalPair cp = canonical_pair(m);
  CHECK(cp.g(0, 0) == doctest::Approx(0.64).epsilon(1e-12));
  CHECK(cp.g(1, 1) == doctest::Approx(0.0));
  CHECK(cp.g(0, 1) == doctest::Approx(0.0));
  // Only the first coordinate carries key: beta = (0.64-0.25)/0.36.
  CHECK(eta_vector(m) == doctest::Approx(13.0 / 12.0).epsilon(1e-10));
}

TEST_CASE("lower-bound oracle certifies below eta and attains it") {
  const GaussVectorModel m = fixed_noncommutative();
  const auto dirs = probe_directions(m, 30, 5);
  const LowerBoundReport lb =
      eta_lower_bound_oracle(m, dirs, {1e-3, 1e-4}, ExecMode::Serial);
  const double eta = eta_vector(m);
  CHECK(lb.eta_lb <= eta + 1e-9);
  CHECK(lb.eta_lb >= 0.99 * eta);
  CHECK(lb.evaluations == static_cast<long>(2 * dirs.size()));
  CHECK(lb.best_ratio / (1.0 - lb.best_ratio) == doctest::Approx(lb.eta_lb).epsilon(1e-12));

  // Deterministic across execution modes, bit for bit.
  const LowerBoundReport lb2 =
      eta_lower_bound_oracle(m, dirs, {1e-3, 1e-4}, ExecMode::Parallel);
  CHECK(lb2.eta_lb == lb.eta_lb);
  CHECK(lb2.best_eps == lb.best_eps);
  CHECK((lb2.best_dir - lb.best_dir).norm() == 0.0);
}

TEST_CASE("coordinate changes leave eta invariant") {
  const GaussVectorModel m = fixed_noncommutative();
  const double eta = eta_vector(m);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const MatrixXd a = oracle::random_invertible(2, 900 + s);
    const MatrixXd b = oracle::random_invertible(2, 950 + s);
    const MatrixXd c = oracle::random_invertible(2, 990 + s);
    GaussVectorModel t;
    t.sx = a * m.sx * a.transpose();
    t.sy = b * m.sy * b.transpose();
    t.sz = c * m.sz * c.transpose();
    t.sxy = a * m.sxy * b.transpose();
    t.sxz = a * m.sxz * c.transpose();
    CHECK(eta_vector(t) == doctest::Approx(eta).epsilon(1e-9));
  }
}
