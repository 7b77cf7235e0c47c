#pragma once

#include "skc/errors.hpp"

namespace skc {

// One scalar Gaussian component: X is seen by the legitimate receiver through
// correlation rho_xy and by the eavesdropper through rho_xz.
struct ScalarGaussTriple {
  double rho_xy = 0.0;
  double rho_xz = 0.0;
};

// Throws DegenerateCorrelation if a correlation lies outside [-1, 1] or
// |rho_xy| is within 1e-12 of 1 (key rate unbounded).
void validate(const ScalarGaussTriple& t);

struct Efficiency {
  double beta = 0.0;
  double beta_plus() const { return beta > 0.0 ? beta : 0.0; }
};

Efficiency beta_of(const ScalarGaussTriple& t);

// Secret-key rate achievable with r nats of one-way public communication:
// R(r) = 0.5 ln(1 + beta^+ - beta^+ e^{-2r}). Throws NegativeRate.
double key_comm(const Efficiency& e, double r);

struct RatePoint {
  double r = 0.0;
  double R = 0.0;
};

// Point on the key-communication curve at slope mu > 0; (0, 0) when
// beta <= mu. Throws NonpositiveMu.
RatePoint rate_point_from_mu(const Efficiency& e, double mu);

// Key-per-communication efficiency sup_r R(r)/r = beta^+.
double eta_scalar(const ScalarGaussTriple& t);

}  // namespace skc
