#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "skc/errors.hpp"
#include "skc/exec.hpp"
#include "skc/sdpi.hpp"

namespace skc {

// Desk-scale one-shot instance: discrete source (X, Y, Z), auxiliary channel
// P(u|x) (|X| rows, |U| columns, row-stochastic), and codebook dimensions
// M (public seed), M1 (key), M2 (local randomization).
struct OneshotInstance {
  DiscreteJoint source;
  Eigen::MatrixXd channel;
  long m = 1, m1 = 2, m2 = 1;
};

void validate(const OneshotInstance& inst);

struct InfoAtom {
  double value = 0.0;  // information density in nats
  double prob = 0.0;
};

// Exact distribution of i(A;B) = ln p(a,b)/(p(a)p(b)) under the joint.
// Throws ZeroMarginal if a marginal vanishes on a charged atom.
std::vector<InfoAtom> info_density_distribution(const Eigen::MatrixXd& joint);

// Optimization grids for the bound infima; empty vectors select the defaults
// (64 log-spaced points spanning the relevant support). A present-but-empty
// user grid is rejected (GridEmpty).
struct BoundGrids {
  std::vector<double> tau;
  std::vector<double> gamma;
  std::vector<double> delta;
  bool user_tau = false, user_gamma = false, user_delta = false;
};

struct BoundReport {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;  // secrecy/covering terms
  double epsilon = 0.0;                 // decoding term
  double epsilon_star = 0.0;            // 2 (t3 + epsilon)
  double t_star = 0.0;                  // 4 (t1 + t2 + 3 t3)
  double leakage_rhs = 0.0;             // inf_delta (t_star + 8 delta) ln(M1^{3/2}/delta)
  double mean_error_rhs = 0.0;          // t3 + epsilon
  double mean_leakage_rhs = 0.0;        // inf_delta 2 ln(M1^{3/2}/delta)(t1+t2+3t3+2delta)
};

// All rates in nats. The infima are taken over finite grids, so every
// reported value is a valid (if slightly loose) upper bound.
BoundReport compute_bounds(const OneshotInstance& inst, const BoundGrids& grids = {});

// Fixed codebook drawn i.i.d. from the auxiliary marginal, with the
// likelihood encoder and exact posterior decoder precomputed.
struct CodebookSystem {
  OneshotInstance inst;
  std::vector<int> codebook;              // u symbol at (w, k, l), row-major
  Eigen::MatrixXd enc_weight;             // |X| rows, M*M1*M2 cols, normalized
  std::vector<int> dec_k;                 // argmax k at (w, y), row-major
  std::uint64_t seed = 0;
};

// Throws CapacityExceeded when M*M1*M2 > 65536 (exact enumeration budget).
CodebookSystem build_system(const OneshotInstance& inst, std::uint64_t seed);

struct SimReport {
  long trials = 0;
  double error_rate = 0.0;
  double ci95_half = 0.0;      // 1.96 sqrt(p(1-p)/n)
  double exact_error = 0.0;    // enumerated error probability of this codebook
  double exact_leakage = 0.0;  // ln M1 - H(K | W, Z) in nats, enumerated
};

// Monte Carlo on fixed-size trial blocks with per-block seeded streams;
// results are identical for Serial and Parallel execution and independent of
// the thread count.
SimReport simulate_system(const CodebookSystem& sys, long trials,
                          ExecMode mode = ExecMode::Parallel);

double exact_error_probability(const CodebookSystem& sys);
double exact_leakage_nats(const CodebookSystem& sys);

}  // namespace skc
