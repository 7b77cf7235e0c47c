#include "skc/sdpi.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace skc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPmfTol = 1e-12;

double kl(const VectorXd& q, const VectorXd& p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += q[i] * std::log(q[i] / p[i]);
  }
  return acc;
}

double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

VectorXd random_simplex(std::mt19937_64& g, Eigen::Index n) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = -std::log(std::max(uniform01(g), 1e-300));
  return v / v.sum();
}

VectorXd clamp_simplex(VectorXd q, double floor) {
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = std::max(q[i], floor);
  return q / q.sum();
}

// Divergence-ratio functional and its (unprojected) gradient. The channel
// matrices map input laws to output laws: qy = wy^T q.
struct RatioProblem {
  VectorXd px, py, pz;
  MatrixXd wy, wz;        // |X| x |Y|, |X| x |Z|; wz.size() == 0: no eavesdropper
  double dn_min = 1e-7;

  bool with_eve() const { return wz.size() > 0; }

  double eval(const VectorXd& q) const {
    const double dx = kl(q, px);
    if (with_eve()) {
      const double dz = kl(VectorXd(wz.transpose() * q), pz);
      const double den = dx - dz;
      if (!(den >= dn_min)) return -std::numeric_limits<double>::infinity();
      return (kl(VectorXd(wy.transpose() * q), py) - dz) / den;
    }
    if (!(dx >= dn_min)) return -std::numeric_limits<double>::infinity();
    return kl(VectorXd(wy.transpose() * q), py) / dx;
  }

  VectorXd grad(const VectorXd& q) const {
    const VectorXd qy = wy.transpose() * q;
    VectorXd gy = wy * VectorXd((qy.array() / py.array()).log().matrix());
    const double dx = kl(q, px);
    const VectorXd gx = (q.array() / px.array()).log().matrix();
    if (!with_eve()) {
      const double nu = kl(qy, py);
      return (gy * dx - nu * gx) / (dx * dx);
    }
    const VectorXd qz = wz.transpose() * q;
    const VectorXd gz = wz * VectorXd((qz.array() / pz.array()).log().matrix());
    const double dz = kl(qz, pz);
    const double num = kl(qy, py) - dz;
    const double den = dx - dz;
    const VectorXd gn = gy - gz;
    const VectorXd gd = gx - gz;
    return (gn * den - num * gd) / (den * den);
  }
};

struct AscentResult {
  double value = -std::numeric_limits<double>::infinity();
  VectorXd q;
};

AscentResult ascend_from(const RatioProblem& prob, VectorXd q,
                         const SearchConfig& cfg, double sign) {
  q = clamp_simplex(std::move(q), cfg.floor);
  double f = sign * prob.eval(q);
  double step = 0.1;
  for (int it = 0; it < cfg.iters; ++it) {
    if (!std::isfinite(f)) {
      // Restarted outside the admissible shell; nudge away from px.
      q = clamp_simplex(1.5 * q - 0.5 * prob.px, cfg.floor);
      f = sign * prob.eval(q);
      if (!std::isfinite(f)) break;
    }
    VectorXd g = sign * prob.grad(q);
    g.array() -= g.mean();
    VectorXd q2 = clamp_simplex(q + step * g, cfg.floor);
    const double f2 = sign * prob.eval(q2);
    if (std::isfinite(f2) && f2 > f) {
      q = std::move(q2);
      f = f2;
      step *= 1.2;
    } else {
      step *= 0.5;
      if (step < 1e-14) break;
    }
  }
  if (!std::isfinite(f)) f = -std::numeric_limits<double>::infinity();
  return {f, q};
}

// Multi-start ascent (sign=+1) or descent (sign=-1); deterministic in the
// seed and independent of the thread count.
AscentResult multi_start(const RatioProblem& prob, const SearchConfig& cfg, double sign) {
  const Eigen::Index n = prob.px.size();
  std::vector<VectorXd> inits;
  std::mt19937_64 g(cfg.seed);
  for (int s = 0; s < cfg.starts; ++s) inits.push_back(random_simplex(g, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd v = VectorXd::Constant(n, 1e-6);
    v[i] = 1.0;
    inits.push_back(v / v.sum());
  }
  std::vector<AscentResult> res(inits.size());
  const auto total = static_cast<std::int64_t>(inits.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t i = 0; i < total; ++i)
    res[static_cast<std::size_t>(i)] =
        ascend_from(prob, inits[static_cast<std::size_t>(i)], cfg, sign);
  AscentResult best;
  for (const auto& r : res)
    if (r.value > best.value) best = r;
  best.value *= sign;
  if (best.q.size() == 0) best.q = prob.px;
  return best;
}

// Leading local direction of the divergence ratio at P_X: generalized
// chi-square eigenproblem restricted to mean-zero perturbations.
std::vector<VectorXd> local_directions(const RatioProblem& prob) {
  const Eigen::Index n = prob.px.size();
  std::vector<VectorXd> dirs;
  MatrixXd a = prob.wy * prob.py.cwiseInverse().asDiagonal() * prob.wy.transpose();
  MatrixXd b = MatrixXd(prob.px.cwiseInverse().asDiagonal());
  if (prob.with_eve()) {
    const MatrixXd az = prob.wz * prob.pz.cwiseInverse().asDiagonal() * prob.wz.transpose();
    a -= az;
    b -= az;
  }
  // Orthonormal basis of the mean-zero subspace.
  MatrixXd c(n, n - 1);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    VectorXd v = VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= j; ++i) v[i] = 1.0;
    v[j + 1] = -static_cast<double>(j + 1);
    c.col(j) = v.normalized();
  }
  const MatrixXd ap = c.transpose() * a * c;
  MatrixXd bp = c.transpose() * b * c;
  bp += 1e-12 * MatrixXd::Identity(n - 1, n - 1);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(
      0.5 * (ap + ap.transpose()), 0.5 * (bp + bp.transpose()));
  if (es.info() == Eigen::Success) {
    dirs.push_back(c * es.eigenvectors().col(n - 2));  // max ratio direction
    dirs.push_back(c * es.eigenvectors().col(0));      // min ratio direction
  }
  for (Eigen::Index i = 0; i + 1 < n && dirs.size() < 8; ++i) {
    VectorXd v = VectorXd::Zero(n);
    v[i] = 1.0;
    v[i + 1] = -1.0;
    dirs.push_back(v.normalized());
  }
  return dirs;
}

struct ProbeResult {
  double best_eval = -std::numeric_limits<double>::infinity();
  VectorXd best_q;
  double extrapolated = std::numeric_limits<double>::quiet_NaN();
};

// Evaluates the ratio along q = p + delta v for the delta ladder and
// Richardson-extrapolates the delta^2 error model to delta -> 0.
ProbeResult perturbation_probe(const RatioProblem& prob, const SearchConfig& cfg,
                               double sign) {
  ProbeResult out;
  double best_extrap = -std::numeric_limits<double>::infinity();
  for (const VectorXd& v : local_directions(prob)) {
    std::vector<std::pair<double, double>> evals;  // (delta, ratio)
    for (double d : cfg.deltas) {
      VectorXd q = prob.px + d * v;
      if (q.minCoeff() < cfg.floor) continue;
      const double f = prob.eval(q);
      if (!std::isfinite(f)) continue;
      evals.emplace_back(d, f);
      if (sign * f > sign * out.best_eval || !std::isfinite(out.best_eval)) {
        out.best_eval = f;
        out.best_q = q;
      }
    }
    if (evals.size() >= 2) {
      std::sort(evals.begin(), evals.end());
      const auto [d2, r2] = evals[0];
      const auto [d1, r1] = evals[1];
      const double ext = (d1 * d1 * r2 - d2 * d2 * r1) / (d1 * d1 - d2 * d2);
      if (sign * ext > sign * best_extrap || !std::isfinite(best_extrap)) {
        best_extrap = ext;
      }
    }
  }
  if (std::isfinite(best_extrap)) out.extrapolated = best_extrap;
  return out;
}

SdpiEstimate optimize(const RatioProblem& prob, const SearchConfig& cfg, double sign) {
  const AscentResult grid = multi_start(prob, cfg, sign);
  const ProbeResult probe = perturbation_probe(prob, cfg, sign);
  SdpiEstimate est;
  if (std::isfinite(probe.best_eval) && sign * probe.best_eval > sign * grid.value) {
    est.s_lower = probe.best_eval;
    est.argmax_q = probe.best_q;
    est.method = SdpiMethod::PerturbationLimit;
  } else {
    est.s_lower = grid.value;
    est.argmax_q = grid.q;
    est.method = SdpiMethod::Grid;
  }
  est.s_extrapolated = probe.extrapolated;
  return est;
}

RatioProblem problem_no_eve(const JointXY& j) {
  validate(j);
  RatioProblem prob;
  prob.px = j.p.rowwise().sum();
  prob.py = j.p.colwise().sum().transpose();
  prob.wy = prob.px.cwiseInverse().asDiagonal() * j.p;
  return prob;
}

RatioProblem problem_degraded(const DiscreteJoint& j) {
  validate(j);
  RatioProblem prob;
  const MatrixXd pxy = j.xy();
  const MatrixXd pxz = j.xz();
  prob.px = pxy.rowwise().sum();
  prob.py = pxy.colwise().sum().transpose();
  prob.pz = pxz.colwise().sum().transpose();
  prob.wy = prob.px.cwiseInverse().asDiagonal() * pxy;
  prob.wz = prob.px.cwiseInverse().asDiagonal() * pxz;
  return prob;
}

double mutual_information(const MatrixXd& joint) {
  const VectorXd pa = joint.rowwise().sum();
  const VectorXd pb = joint.colwise().sum().transpose();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < joint.rows(); ++a)
    for (Eigen::Index b = 0; b < joint.cols(); ++b) {
      const double p = joint(a, b);
      if (p > 0.0) acc += p * std::log(p / (pa[a] * pb[b]));
    }
  return acc;
}

VectorXd project_row_simplex(VectorXd v) {
  // Euclidean projection onto the probability simplex.
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i + 1);
      theta = t;
    }
  }
  (void)rho;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::max(0.0, v[i] - theta);
  return v;
}

}  // namespace

void validate(const JointXY& j) {
  if (j.p.size() == 0) throw LengthMismatch("empty joint pmf");
  if (j.p.minCoeff() < -kPmfTol) throw ValidationError("negative pmf entry");
  if (std::abs(j.p.sum() - 1.0) > kPmfTol)
    throw ValidationError("pmf does not sum to 1");
  const VectorXd rows = j.p.rowwise().sum();
  if (rows.minCoeff() <= 0.0)
    throw DegenerateChannel("an input symbol has zero mass; channel undefined");
}

Eigen::MatrixXd DiscreteJoint::xy() const {
  MatrixXd m = MatrixXd::Zero(nx, ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) m(x, y) += at(x, y, z);
  return m;
}

Eigen::MatrixXd DiscreteJoint::xz() const {
  MatrixXd m = MatrixXd::Zero(nx, nz);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) m(x, z) += at(x, y, z);
  return m;
}

void validate(const DiscreteJoint& j) {
  if (j.nx <= 0 || j.ny <= 0 || j.nz <= 0 ||
      j.p.size() != static_cast<std::size_t>(j.nx) * j.ny * j.nz)
    throw LengthMismatch("pmf size does not match dimensions");
  double sum = 0.0;
  for (double v : j.p) {
    if (v < -kPmfTol) throw ValidationError("negative pmf entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kPmfTol) throw ValidationError("pmf does not sum to 1");
  const MatrixXd pxy = j.xy();
  if (pxy.rowwise().sum().minCoeff() <= 0.0)
    throw DegenerateChannel("an input symbol has zero mass; channels undefined");
}

SdpiEstimate s_star_no_eve(const JointXY& j, const SearchConfig& cfg) {
  return optimize(problem_no_eve(j), cfg, +1.0);
}

DegradednessCheck check_degradedness(const DiscreteJoint& j, int iters, double tol) {
  validate(j);
  const MatrixXd pxy = j.xy();
  const MatrixXd pxz = j.xz();
  DegradednessCheck out;

  // Least squares first: exact cascades solve it outright.
  MatrixXd w = pxy.completeOrthogonalDecomposition().solve(pxz);
  auto feasible = [&](const MatrixXd& m) {
    return m.minCoeff() > -1e-9 &&
           (m.rowwise().sum() - VectorXd::Ones(m.rows())).cwiseAbs().maxCoeff() < 1e-9;
  };
  if (!feasible(w)) {
    // Projected gradient on the row-simplex product.
    for (Eigen::Index y = 0; y < w.rows(); ++y)
      w.row(y) = project_row_simplex(w.row(y).transpose()).transpose();
    const double step = 1.0 / std::max(1e-12, pxy.squaredNorm());
    for (int it = 0; it < iters; ++it) {
      const MatrixXd grad = pxy.transpose() * (pxy * w - pxz);
      MatrixXd next = w - step * grad;
      for (Eigen::Index y = 0; y < next.rows(); ++y)
        next.row(y) = project_row_simplex(next.row(y).transpose()).transpose();
      if ((next - w).norm() < 1e-14) {
        w = next;
        break;
      }
      w = next;
    }
  } else {
    for (Eigen::Index y = 0; y < w.rows(); ++y) {
      w.row(y) = w.row(y).cwiseMax(0.0);
      w.row(y) /= w.row(y).sum();
    }
  }
  out.w_zy = w;
  out.residual = (pxy * w - pxz).norm();
  out.degraded = out.residual <= tol;
  return out;
}

SdpiEstimate s_star_degraded(const DiscreteJoint& j, const SearchConfig& cfg) {
  const DegradednessCheck dc = check_degradedness(j);
  if (!dc.degraded)
    throw NotDegraded("no garbling of Y reproduces Z: residual " +
                      std::to_string(dc.residual));
  return optimize(problem_degraded(j), cfg, +1.0);
}

double eta_from_s(double s) {
  if (s >= 1.0) throw PoleAtOne("s = " + std::to_string(s) + " >= 1: eta diverges");
  return s / (1.0 - s);
}

double eta_bernoulli(double eps_xy, double eps_xz) {
  if (!(eps_xy >= 0.0 && eps_xy <= eps_xz && eps_xz <= 0.5))
    throw OrderViolation("need 0 <= eps_xy <= eps_xz <= 1/2");
  if (eps_xy == 0.0) throw PoleAtOne("noiseless legitimate channel: eta diverges");
  const double a = 1.0 - 2.0 * eps_xy;
  const double b = 1.0 - 2.0 * eps_xz;
  return (a * a - b * b) / (1.0 - a * a);
}

boost::rational<long long> eta_bernoulli(const boost::rational<long long>& eps_xy,
                                         const boost::rational<long long>& eps_xz) {
  using R = boost::rational<long long>;
  const R half(1, 2);
  if (!(eps_xy >= R(0) && eps_xy <= eps_xz && eps_xz <= half))
    throw OrderViolation("need 0 <= eps_xy <= eps_xz <= 1/2");
  if (eps_xy == R(0)) throw PoleAtOne("noiseless legitimate channel: eta diverges");
  const R a = R(1) - R(2) * eps_xy;
  const R b = R(1) - R(2) * eps_xz;
  return (a * a - b * b) / (R(1) - a * a);
}

TensorizationReport tensorization_check(const JointXY& a, const JointXY& b,
                                        const SearchConfig& cfg, double tol) {
  TensorizationReport rep;
  SearchConfig comp_cfg = cfg;
  const SdpiEstimate ea = s_star_no_eve(a, comp_cfg);
  comp_cfg.seed = cfg.seed + 1;
  const SdpiEstimate eb = s_star_no_eve(b, comp_cfg);
  rep.s_first = ea.s_lower;
  rep.s_second = eb.s_lower;

  JointXY prod;
  prod.p = Eigen::kroneckerProduct(a.p, b.p).eval();
  SearchConfig prod_cfg = cfg;
  prod_cfg.seed = cfg.seed + 2;
  prod_cfg.starts = std::max(cfg.starts, 48);
  const SdpiEstimate ep = s_star_no_eve(prod, prod_cfg);
  rep.s_product = ep.s_lower;
  const double comp_max = std::max(rep.s_first, rep.s_second);
  rep.gap = rep.s_product - comp_max;

  // Embed the winning component optimizer as a product-shaped perturbation.
  const RatioProblem pp = problem_no_eve(prod);
  VectorXd q_embed;
  if (rep.s_first >= rep.s_second) {
    const VectorXd pb = b.p.rowwise().sum();
    q_embed = Eigen::kroneckerProduct(ea.argmax_q, pb).eval();
  } else {
    const VectorXd pa = a.p.rowwise().sum();
    q_embed = Eigen::kroneckerProduct(pa, eb.argmax_q).eval();
  }
  rep.embedded_ratio = pp.eval(q_embed);
  rep.pass = rep.gap <= tol && rep.embedded_ratio >= comp_max - tol;
  return rep;
}

SdpiEstimate s_lower_constant(const JointXY& j, const SearchConfig& cfg) {
  return optimize(problem_no_eve(j), cfg, -1.0);
}

double e18_ratio(const DiscreteJoint& j, const Eigen::MatrixXd& q_vx) {
  validate(j);
  const auto nv = q_vx.rows();
  if (nv < 1 || nv > 4)
    throw ValidationError("auxiliary alphabet limited to |V| <= 4");
  if (q_vx.cols() != j.nx) throw LengthMismatch("Q_VX column count != |X|");
  if (q_vx.minCoeff() < -kPmfTol) throw ValidationError("negative Q_VX entry");
  if (std::abs(q_vx.sum() - 1.0) > kPmfTol)
    throw ValidationError("Q_VX does not sum to 1");

  const MatrixXd pxy = j.xy();
  const MatrixXd pxz = j.xz();
  const VectorXd px = pxy.rowwise().sum();
  const VectorXd qx = q_vx.colwise().sum().transpose();

  // Tilted joints under Q_VX P_{YZ|X}.
  MatrixXd jvx = q_vx;
  MatrixXd jvy = MatrixXd::Zero(nv, j.ny);
  MatrixXd jvz = MatrixXd::Zero(nv, j.nz);
  for (Eigen::Index v = 0; v < nv; ++v)
    for (int x = 0; x < j.nx; ++x) {
      const double scale = q_vx(v, x) / px[x];
      if (scale == 0.0) continue;
      for (int y = 0; y < j.ny; ++y)
        for (int z = 0; z < j.nz; ++z) {
          jvy(v, y) += scale * j.at(x, y, z);
          jvz(v, z) += scale * j.at(x, y, z);
        }
    }

  const VectorXd qy = jvy.colwise().sum().transpose();
  const VectorXd py = pxy.colwise().sum().transpose();
  const double num = mutual_information(jvy) - mutual_information(jvz);
  const double den = mutual_information(jvx) - mutual_information(jvz) +
                     kl(qx, px) - kl(qy, py);
  if (!(den > 0.0))
    throw IllConditioned("nonpositive denominator in the variational ratio");
  return num / den;
}

}  // namespace skc
