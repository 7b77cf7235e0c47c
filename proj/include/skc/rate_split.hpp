#pragma once

#include <vector>

#include "skc/scalar.hpp"

namespace skc {

struct ProductGaussSource {
  std::vector<Efficiency> components;

  static ProductGaussSource from_betas(const std::vector<double>& betas);
};

struct Allocation {
  std::vector<double> r;  // per-component communication, component order
  double r_total = 0.0;
  double R_total = 0.0;
};

struct CurvePoint {
  double mu = 0.0;
  double r = 0.0;
  double R = 0.0;
  Allocation alloc;
};

// Water-filling point at slope mu: components with beta_i > mu are active,
// each at its scalar rate point; the rest get zero communication.
CurvePoint product_curve_point(const ProductGaussSource& src, double mu);

struct SplitResult {
  double mu = 0.0;  // NaN when degenerate
  double R = 0.0;
  Allocation alloc;
  bool degenerate = false;  // no positive-beta component
};

// Inverts the budget -> slope map by bisection on mu in [1e-12, max beta^+].
// Residual |r(mu) - r_total| <= 1e-9 whenever the budget is attainable inside
// the bracket; larger budgets return the bracket-bottom point (the achieved
// total is in alloc.r_total). Throws NegativeRate.
SplitResult split_for_budget(const ProductGaussSource& src, double r_total);

// max_i beta_i^+ (0 for an empty or all-nonpositive source).
double eta_product(const ProductGaussSource& src);

}  // namespace skc
