#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "skc/errors.hpp"
#include "skc/exec.hpp"

namespace skc {

// Joint pmf of (X, Y) as an |X| x |Y| matrix. Every row must carry mass
// (P_X strictly positive) so the channel P_{Y|X} is defined.
struct JointXY {
  Eigen::MatrixXd p;
};

void validate(const JointXY& j);

// Joint pmf of (X, Y, Z), row-major over (x, y, z).
struct DiscreteJoint {
  std::vector<double> p;
  int nx = 0, ny = 0, nz = 0;

  double at(int x, int y, int z) const {
    return p[(static_cast<std::size_t>(x) * ny + y) * nz + z];
  }
  Eigen::MatrixXd xy() const;  // marginal joint of (X, Y)
  Eigen::MatrixXd xz() const;
};

void validate(const DiscreteJoint& j);

struct SearchConfig {
  int starts = 32;
  int iters = 400;
  double floor = 1e-12;     // simplex clamp during ascent
  double dn_min = 1e-7;     // reject ratios with denominator below this
  std::uint64_t seed = 1;
  std::vector<double> deltas = {1e-2, 1e-3, 1e-4};  // perturbation ladder
};

enum class SdpiMethod { Grid, PerturbationLimit };

struct SdpiEstimate {
  double s_lower = 0.0;        // certified bound attained by argmax_q (an
                               // upper bound for the inf problem)
  Eigen::VectorXd argmax_q;    // witnessing input distribution
  SdpiMethod method = SdpiMethod::Grid;
  double s_extrapolated = 0.0; // delta -> 0 Richardson value (NaN when the
                               // perturbation probe had no valid evaluations)
};

// sup_{Q_X != P_X} D(Q_Y||P_Y)/D(Q_X||P_X): multi-start projected gradient
// ascent plus a perturbation-limit probe around P_X; the reported s_value is
// a certified lower bound (every candidate is an evaluated ratio).
SdpiEstimate s_star_no_eve(const JointXY& j, const SearchConfig& cfg = {});

// Degraded-eavesdropper form: sup over Q_X of
// (D(Q_Y||P_Y) - D(Q_Z||P_Z)) / (D(Q_X||P_X) - D(Q_Z||P_Z)).
// Requires X - Y - Z degradedness (NotDegraded).
SdpiEstimate s_star_degraded(const DiscreteJoint& j, const SearchConfig& cfg = {});

struct DegradednessCheck {
  bool degraded = false;
  double residual = 0.0;       // || P_XY W - P_XZ ||_F at the best W
  Eigen::MatrixXd w_zy;        // row-stochastic |Y| x |Z| garbling
};

// Convex feasibility: least squares for the garbling kernel, then projected
// gradient onto row simplices if needed.
DegradednessCheck check_degradedness(const DiscreteJoint& j, int iters = 5000,
                                     double tol = 1e-9);

// eta = s/(1-s); PoleAtOne when s >= 1.
double eta_from_s(double s);

// Closed form for the binary symmetric cascade with crossover eps_xy to the
// receiver and eps_xz to the eavesdropper. Requires
// 0 < eps_xy <= eps_xz <= 1/2 (OrderViolation), eps_xy < 1/2 (PoleAtOne).
double eta_bernoulli(double eps_xy, double eps_xz);
boost::rational<long long> eta_bernoulli(const boost::rational<long long>& eps_xy,
                                         const boost::rational<long long>& eps_xz);

struct TensorizationReport {
  double s_first = 0.0;
  double s_second = 0.0;
  double s_product = 0.0;       // best ratio found on the product source
  double gap = 0.0;             // s_product - max(s_first, s_second)
  double embedded_ratio = 0.0;  // best component optimizer embedded as Q x P
  bool pass = false;
};

// Verifies that the product source exposes no super-multiplicative gain and
// that the component optimum survives product embedding.
TensorizationReport tensorization_check(const JointXY& a, const JointXY& b,
                                        const SearchConfig& cfg = {},
                                        double tol = 1e-3);

// inf version of the no-eavesdropper ratio; the reported s_value is a
// certified upper bound on the infimum.
SdpiEstimate s_lower_constant(const JointXY& j, const SearchConfig& cfg = {});

// Ratio of the general variational form for a user-supplied auxiliary joint
// Q_VX (rows: v, cols: x), |V| <= 4. Evaluation only; no optimization.
double e18_ratio(const DiscreteJoint& j, const Eigen::MatrixXd& q_vx);

}  // namespace skc
