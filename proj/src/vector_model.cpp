#include "skc/vector_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace skc {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kSaturation = 1e-10;
constexpr double kClusterTol = 1e-8;

using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_square(const MatrixXd& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n)
    throw LengthMismatch(std::string("block ") + name + " is not " +
                         std::to_string(n) + "x" + std::to_string(n));
}

double min_eig(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Inverse square root on the rank support, identity on the null space: keeps
// the whitening transform positive definite (hence invertible) while acting
// as the true pseudo-inverse square root wherever the matrix has mass.
MatrixXd completed_inv_sqrt(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  const VectorXd& w = es.eigenvalues();
  const double thr = kRankTol * std::max(1.0, w.cwiseAbs().maxCoeff());
  VectorXd d(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    d[i] = w[i] > thr ? 1.0 / std::sqrt(w[i]) : 1.0;
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd pseudo_inverse(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  const VectorXd& w = es.eigenvalues();
  const double thr = kRankTol * std::max(1.0, w.cwiseAbs().maxCoeff());
  VectorXd d(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) d[i] = w[i] > thr ? 1.0 / w[i] : 0.0;
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double rel_commutator(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max(1.0, a.norm() * b.norm());
  return (a * b - b * a).norm() / scale;
}

// Jointly diagonalizes a family of commuting symmetric matrices by recursive
// eigenspace refinement: each matrix is diagonalized on the eigenvalue
// clusters left by its predecessors.
MatrixXd simultaneous_diagonalizer(const std::vector<MatrixXd>& mats) {
  const Eigen::Index n = mats.front().rows();
  MatrixXd q = MatrixXd::Identity(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks{{0, n}};  // [lo, hi)
  for (const MatrixXd& a : mats) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> next;
    for (auto [lo, hi] : blocks) {
      const Eigen::Index len = hi - lo;
      MatrixXd sub = q.middleCols(lo, len).transpose() * a * q.middleCols(lo, len);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sub + sub.transpose()));
      q.middleCols(lo, len) = q.middleCols(lo, len) * es.eigenvectors();
      const VectorXd& w = es.eigenvalues();
      Eigen::Index start = 0;
      for (Eigen::Index i = 1; i <= len; ++i) {
        if (i == len || w[i] - w[i - 1] > kClusterTol) {
          next.emplace_back(lo + start, lo + i);
          start = i;
        }
      }
    }
    blocks = std::move(next);
  }
  return q;
}

// Extends the near-orthonormal rows in `rows` (those with used[i]) to a full
// orthogonal matrix whose added rows diagonalize `metric` on the complement.
MatrixXd complete_orthogonal(const MatrixXd& rows, const std::vector<bool>& used,
                             const MatrixXd& metric) {
  const Eigen::Index n = rows.cols();
  std::vector<VectorXd> basis;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    if (used[static_cast<std::size_t>(i)]) {
      VectorXd v = rows.row(i).transpose();
      for (const VectorXd& b : basis) v -= b.dot(v) * b;
      v.normalize();
      basis.push_back(v);
    }
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  // Orthonormal complement from the least-dependent coordinate seeds.
  MatrixXd comp(n, n - m);
  Eigen::Index got = 0;
  for (Eigen::Index j = 0; j < n && got < n - m; ++j) {
    VectorXd v = VectorXd::Unit(n, j);
    for (const VectorXd& b : basis) v -= b.dot(v) * b;
    for (Eigen::Index k = 0; k < got; ++k) v -= comp.col(k).dot(v) * comp.col(k);
    if (v.norm() > 1e-7) comp.col(got++) = v.normalized();
  }
  if (got < n - m) throw IllConditioned("orthogonal completion failed");
  if (n - m > 0) {
    MatrixXd small = comp.transpose() * metric * comp;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (small + small.transpose()));
    comp = comp * es.eigenvectors();
  }
  // Keep used rows at their original indices so the cross block stays
  // diagonal; unused slots take the complement basis in order.
  MatrixXd out(n, n);
  std::size_t bi = 0;
  Eigen::Index ci = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (used[static_cast<std::size_t>(i)])
      out.row(i) = basis[bi++].transpose();
    else
      out.row(i) = comp.col(ci++).transpose();
  }
  return out;
}

double offdiag_mass(const MatrixXd& m) {
  MatrixXd d = m;
  d.diagonal().setZero();
  return d.norm() / std::max(1.0, m.norm());
}

}  // namespace

void validate(const GaussVectorModel& m, double tol) {
  const Eigen::Index n = m.sx.rows();
  if (n == 0) throw LengthMismatch("empty model");
  require_square(m.sx, n, "sx");
  require_square(m.sy, n, "sy");
  require_square(m.sz, n, "sz");
  require_square(m.sxy, n, "sxy");
  require_square(m.sxz, n, "sxz");
  for (const auto* s : {&m.sx, &m.sy, &m.sz})
    if ((*s - s->transpose()).norm() > tol * std::max(1.0, s->norm()))
      throw ValidationError("diagonal covariance block is not symmetric");
  MatrixXd pair(2 * n, 2 * n);
  pair << m.sx, m.sxy, m.sxy.transpose(), m.sy;
  const double sy_scale = std::max(1.0, pair.norm());
  if (min_eig(0.5 * (pair + pair.transpose())) < -tol * sy_scale)
    throw ValidationError("(X,Y) covariance is not positive semidefinite");
  pair << m.sx, m.sxz, m.sxz.transpose(), m.sz;
  if (min_eig(0.5 * (pair + pair.transpose())) < -tol * std::max(1.0, pair.norm()))
    throw ValidationError("(X,Z) covariance is not positive semidefinite");
}

CanonicalPair canonical_pair(const GaussVectorModel& m) {
  validate(m);
  const MatrixXd wx = completed_inv_sqrt(m.sx);
  MatrixXd g = wx * m.sxy * pseudo_inverse(m.sy) * m.sxy.transpose() * wx;
  MatrixXd h = wx * m.sxz * pseudo_inverse(m.sz) * m.sxz.transpose() * wx;
  return {0.5 * (g + g.transpose()), 0.5 * (h + h.transpose())};
}

CommutativityReport is_commutative(const CanonicalPair& p, double tol) {
  const double defect = rel_commutator(p.g, p.h);
  return {defect <= tol, defect};
}

ProductForm to_product_form(const GaussVectorModel& m, double tol) {
  const CanonicalPair cp = canonical_pair(m);
  const CommutativityReport rep = is_commutative(cp, tol);
  if (!rep.commutative)
    throw NotCommutative("canonical pair does not commute: defect " +
                         std::to_string(rep.defect));

  const Eigen::Index n = m.dim();
  const MatrixXd wx = completed_inv_sqrt(m.sx);
  const MatrixXd wy = completed_inv_sqrt(m.sy);
  const MatrixXd wz = completed_inv_sqrt(m.sz);
  const MatrixXd sxt = wx * m.sx * wx;  // ~projector onto the X support
  const MatrixXd axy = wx * m.sxy * wy;
  const MatrixXd axz = wx * m.sxz * wz;

  // One orthogonal basis diagonalizing the support projector, G and H.
  const MatrixXd q = simultaneous_diagonalizer({sxt, cp.g, cp.h});
  const MatrixXd mxy = q.transpose() * axy;  // rows are mutually orthogonal
  const MatrixXd mxz = q.transpose() * axz;

  auto side_rotation = [&](const MatrixXd& rows, const MatrixXd& metric,
                           VectorXd& cross) {
    std::vector<bool> used(static_cast<std::size_t>(n));
    MatrixXd unit = MatrixXd::Zero(n, n);
    cross.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = rows.row(i).norm();
      cross[i] = d;
      if (d > 1e-9) {
        unit.row(i) = rows.row(i) / d;
        used[static_cast<std::size_t>(i)] = true;
      }
    }
    return complete_orthogonal(unit, used, metric);
  };

  VectorXd dxy, dxz;
  const MatrixXd qy = side_rotation(mxy, wy * m.sy * wy, dxy);
  const MatrixXd qz = side_rotation(mxz, wz * m.sz * wz, dxz);

  ProductForm out;
  out.tx = q.transpose() * wx;
  out.ty = qy * wy;
  out.tz = qz * wz;

  // Variances in the new coordinates; padding components have none.
  const VectorXd vx = (out.tx * m.sx * out.tx.transpose()).diagonal();
  const VectorXd vy = (out.ty * m.sy * out.ty.transpose()).diagonal();
  const VectorXd vz = (out.tz * m.sz * out.tz.transpose()).diagonal();

  std::vector<ScalarGaussTriple> comps(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& c = comps[static_cast<std::size_t>(i)];
    c.rho_xy = (vx[i] > 1e-12 && vy[i] > 1e-12) ? dxy[i] / std::sqrt(vx[i] * vy[i]) : 0.0;
    c.rho_xz = (vx[i] > 1e-12 && vz[i] > 1e-12) ? dxz[i] / std::sqrt(vx[i] * vz[i]) : 0.0;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto beta_at = [&](Eigen::Index i) {
    return beta_of(comps[static_cast<std::size_t>(i)]).beta;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return beta_at(a) > beta_at(b); });

  MatrixXd px = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) px(i, order[static_cast<std::size_t>(i)]) = 1.0;
  out.tx = px * out.tx;
  out.ty = px * out.ty;
  out.tz = px * out.tz;
  out.components.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    out.components[static_cast<std::size_t>(i)] = comps[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  out.source.components.reserve(static_cast<std::size_t>(n));
  for (const auto& c : out.components) out.source.components.push_back(beta_of(c));

  // Construction must have diagonalized every block; anything else means the
  // clustering tolerance was defeated.
  for (const MatrixXd& b :
       {MatrixXd(out.tx * m.sx * out.tx.transpose()),
        MatrixXd(out.ty * m.sy * out.ty.transpose()),
        MatrixXd(out.tz * m.sz * out.tz.transpose()),
        MatrixXd(out.tx * m.sxy * out.ty.transpose()),
        MatrixXd(out.tx * m.sxz * out.tz.transpose())}) {
    if (offdiag_mass(b) > 1e-8)
      throw IllConditioned("product form left off-diagonal mass " +
                           std::to_string(offdiag_mass(b)));
  }
  return out;
}

namespace {

// Symmetric similarity (I-G)^{-1/2} M (I-G)^{-1/2}; throws when I-G is not
// comfortably positive definite.
MatrixXd saturation_guarded_form(const MatrixXd& g, const MatrixXd& target) {
  const Eigen::Index n = g.rows();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd::Identity(n, n) - g);
  const VectorXd& w = es.eigenvalues();
  if (w.minCoeff() <= kSaturation)
    throw SaturatedCorrelation(
        "legitimate correlation saturated: lambda_max(G) = " +
        std::to_string(1.0 - w.minCoeff()) + "; eta is unbounded");
  const VectorXd d = w.cwiseSqrt().cwiseInverse();
  const MatrixXd half = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  MatrixXd out = half * target * half;
  return 0.5 * (out + out.transpose());
}

double eta_of_pair(const MatrixXd& g, const MatrixXd& h) {
  const MatrixXd psi = saturation_guarded_form(g, g - h);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(psi, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

}  // namespace

double eta_vector(const GaussVectorModel& m) {
  const CanonicalPair cp = canonical_pair(m);
  return eta_of_pair(cp.g, cp.h);
}

bool EnhancedCheckReport::pass(double tol) const {
  return domination_margin >= -tol && commute_defect <= tol &&
         std::abs(eta_original - eta_enhanced) <= tol * std::max(1.0, eta_original);
}

EnhancedCheckReport enhanced_model_check(const GaussVectorModel& m) {
  const CanonicalPair cp = canonical_pair(m);
  const Eigen::Index n = cp.g.rows();
  const MatrixXd eye = MatrixXd::Identity(n, n);

  Eigen::SelfAdjointEigenSolver<MatrixXd> esh(eye - cp.h);
  if (esh.eigenvalues().minCoeff() <= kSaturation)
    throw IllConditioned("eavesdropper correlation saturated: I - H singular");

  EnhancedCheckReport rep;
  {
    const VectorXd d = esh.eigenvalues().cwiseSqrt().cwiseInverse();
    const MatrixXd half = esh.eigenvectors() * d.asDiagonal() * esh.eigenvectors().transpose();
    MatrixXd psi = half * (cp.g - cp.h) * half;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (psi + psi.transpose()),
                                               Eigen::EigenvaluesOnly);
    rep.s = es.eigenvalues().maxCoeff();
  }
  if (rep.s >= 1.0)
    throw SaturatedCorrelation("strong-DPI constant s >= 1; eta unbounded");

  rep.h_hat = eye - (eye - cp.g) / (1.0 - rep.s);
  rep.h_hat = 0.5 * (rep.h_hat + rep.h_hat.transpose());
  rep.domination_margin = min_eig(cp.h - rep.h_hat);
  rep.commute_defect = rel_commutator(cp.g, rep.h_hat);
  rep.eta_original = eta_of_pair(cp.g, cp.h);
  rep.eta_enhanced = eta_of_pair(cp.g, rep.h_hat);
  return rep;
}

LowerBoundReport eta_lower_bound_oracle(const GaussVectorModel& m,
                                        const std::vector<Eigen::VectorXd>& directions,
                                        const std::vector<double>& epsilons,
                                        ExecMode mode) {
  if (directions.empty() || epsilons.empty())
    throw GridEmpty("lower-bound oracle needs at least one direction and one eps");
  const CanonicalPair cp = canonical_pair(m);
  const Eigen::Index n = cp.g.rows();
  const MatrixXd eye = MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> esh(eye - cp.h);
  if (esh.eigenvalues().minCoeff() <= kSaturation)
    throw IllConditioned("I - H singular; auxiliary design undefined");
  const MatrixXd ih_half = esh.eigenvectors() *
                           esh.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           esh.eigenvectors().transpose();

  const auto ndir = static_cast<std::int64_t>(directions.size());
  struct Best {
    double s = -1.0;
    double eps = 0.0;
    std::int64_t dir = -1;
  };
  std::vector<Best> per_dir(directions.size());

#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (mode == ExecMode::Parallel)
#endif
  for (std::int64_t di = 0; di < ndir; ++di) {
    const VectorXd u = directions[static_cast<std::size_t>(di)].normalized();
    const VectorXd w = ih_half * u;
    const double a = w.squaredNorm();
    const double gy = w.dot(cp.g * w);
    const double gz = w.dot(cp.h * w);
    Best b;
    b.dir = di;
    for (double eps : epsilons) {
      if (!(eps > 0.0) || eps * a >= 1.0) continue;
      // Rank-one conditional update: the three mutual informations are exact
      // scalar log-determinants.
      const double ivx = -0.5 * std::log1p(-eps * a);
      const double ivy = -0.5 * std::log1p(-eps * gy);
      const double ivz = -0.5 * std::log1p(-eps * gz);
      const double den = ivx - ivz;
      if (den <= 1e-300) continue;
      const double s = (ivy - ivz) / den;
      if (s > b.s) {
        b.s = s;
        b.eps = eps;
      }
    }
    per_dir[static_cast<std::size_t>(di)] = b;
  }
  (void)mode;

  Best best;
  for (const Best& b : per_dir)
    if (b.s > best.s) best = b;

  LowerBoundReport rep;
  rep.evaluations = ndir * static_cast<long>(epsilons.size());
  if (best.dir < 0) return rep;
  rep.best_ratio = best.s;
  rep.best_dir = directions[static_cast<std::size_t>(best.dir)].normalized();
  rep.best_eps = best.eps;
  rep.eta_lb = best.s < 1.0 ? std::max(0.0, best.s / (1.0 - best.s))
                            : std::numeric_limits<double>::infinity();
  return rep;
}

std::vector<CurvePoint> vector_curve(const GaussVectorModel& m,
                                     const std::vector<double>& mu_grid,
                                     double tol) {
  const ProductForm pf = to_product_form(m, tol);
  std::vector<CurvePoint> out;
  out.reserve(mu_grid.size());
  for (double mu : mu_grid) out.push_back(product_curve_point(pf.source, mu));
  return out;
}

}  // namespace skc
