#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skc/errors.hpp"
#include "skc/exec.hpp"
#include "skc/rate_split.hpp"

namespace skc {

// Jointly Gaussian vector source described by its covariance blocks, all LxL.
// Rectangular sources are handled by zero-padding the shorter vector (the
// padded rows/columns are zero, the pseudo-inverse paths ignore them).
struct GaussVectorModel {
  Eigen::MatrixXd sx, sy, sz, sxy, sxz;

  Eigen::Index dim() const { return sx.rows(); }
};

// Checks block sizes, symmetry of the diagonal blocks and positive
// semidefiniteness of the (X,Y) and (X,Z) pair covariances within tol.
void validate(const GaussVectorModel& m, double tol = 1e-10);

struct CanonicalPair {
  Eigen::MatrixXd g, h;
};

// G = Sx^{-1/2} Sxy Sy^{-1} Syx Sx^{-1/2} and the Z analog, with
// pseudo-inverses on the rank support (relative threshold 1e-10).
CanonicalPair canonical_pair(const GaussVectorModel& m);

struct CommutativityReport {
  bool commutative = false;
  double defect = 0.0;  // ||GH-HG||_F / max(1, ||G||_F ||H||_F)
};

CommutativityReport is_commutative(const CanonicalPair& p, double tol = 1e-9);

struct ProductForm {
  Eigen::MatrixXd tx, ty, tz;  // invertible; x_bar = tx * x etc.
  std::vector<ScalarGaussTriple> components;  // nonnegative rhos,
                                              // sorted by beta descending
  ProductGaussSource source;                  // betas, same order
};

// Simultaneous diagonalization of a commutative model into independent scalar
// triples. Throws NotCommutative when the canonical pair does not commute
// within tol.
ProductForm to_product_form(const GaussVectorModel& m, double tol = 1e-9);

// Largest positive eigenvalue of (I-G)^{-1/2}(G-H)(I-G)^{-1/2}, clamped at 0.
// Throws SaturatedCorrelation when lambda_max(G) >= 1 - 1e-10 (eta unbounded).
double eta_vector(const GaussVectorModel& m);

struct EnhancedCheckReport {
  double s = 0.0;                  // lambda_max((I-H)^{-1/2}(G-H)(I-H)^{-1/2})
  Eigen::MatrixXd h_hat;           // I - (I-G)/(1-s)
  double domination_margin = 0.0;  // min eig of H - h_hat (>= -tol required)
  double commute_defect = 0.0;     // relative commutator norm of (G, h_hat)
  double eta_original = 0.0;
  double eta_enhanced = 0.0;

  bool pass(double tol = 1e-9) const;
};

// Replaces the eavesdropper by a dominated one that commutes with G and
// preserves eta exactly; reports the verification margins.
EnhancedCheckReport enhanced_model_check(const GaussVectorModel& m);

struct LowerBoundReport {
  double eta_lb = 0.0;      // best certified value, max over probes
  double best_ratio = 0.0;  // divergence ratio s achieving it
  Eigen::VectorXd best_dir;
  double best_eps = 0.0;
  long evaluations = 0;
};

// Certified lower bound on eta from rank-one Gaussian auxiliaries: for each
// unit direction u and eps, the auxiliary with conditional covariance
// I - eps (I-H)^{-1/2} u u^T (I-H)^{-1/2} (whitened coordinates) gives exact
// mutual informations via rank-one log-determinants; the divergence ratio is
// mapped through s -> s/(1-s). Never exceeds eta_vector.
LowerBoundReport eta_lower_bound_oracle(const GaussVectorModel& m,
                                        const std::vector<Eigen::VectorXd>& directions,
                                        const std::vector<double>& epsilons,
                                        ExecMode mode = ExecMode::Parallel);

// Water-filling curve of a commutative model over a slope grid.
std::vector<CurvePoint> vector_curve(const GaussVectorModel& m,
                                     const std::vector<double>& mu_grid,
                                     double tol = 1e-9);

}  // namespace skc
