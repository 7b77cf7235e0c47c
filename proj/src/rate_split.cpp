#include "skc/rate_split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skc {

namespace {

constexpr double kMuFloor = 1e-12;
constexpr double kBudgetResidual = 1e-9;

Allocation allocation_at(const ProductGaussSource& src, double mu) {
  Allocation a;
  a.r.resize(src.components.size(), 0.0);
  for (std::size_t i = 0; i < src.components.size(); ++i) {
    const RatePoint p = rate_point_from_mu(src.components[i], mu);
    a.r[i] = p.r;
    a.r_total += p.r;
    a.R_total += p.R;
  }
  return a;
}

}  // namespace

ProductGaussSource ProductGaussSource::from_betas(const std::vector<double>& betas) {
  ProductGaussSource s;
  s.components.reserve(betas.size());
  for (double b : betas) s.components.push_back({b});
  return s;
}

CurvePoint product_curve_point(const ProductGaussSource& src, double mu) {
  CurvePoint p;
  p.mu = mu;
  p.alloc = allocation_at(src, mu);
  p.r = p.alloc.r_total;
  p.R = p.alloc.R_total;
  return p;
}

SplitResult split_for_budget(const ProductGaussSource& src, double r_total) {
  if (!(r_total >= 0.0)) throw NegativeRate("budget must be >= 0");
  SplitResult out;
  const double top = eta_product(src);
  if (top <= 0.0) {
    out.mu = std::numeric_limits<double>::quiet_NaN();
    out.degenerate = true;
    out.alloc.r.resize(src.components.size(), 0.0);
    return out;
  }
  if (r_total == 0.0) {
    out.mu = top;
    out.alloc = allocation_at(src, top);
    out.R = out.alloc.R_total;
    return out;
  }

  // r(mu) decreases strictly on (0, top]; bisect the bracket from the design
  // floor up to the largest efficiency.
  double lo = kMuFloor, hi = top;
  if (allocation_at(src, lo).r_total <= r_total) {
    // Budget beyond the bracket: return the floor point (best effort).
    out.mu = lo;
    out.alloc = allocation_at(src, lo);
    out.R = out.alloc.R_total;
    return out;
  }
  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mu = 0.5 * (lo + hi);
    const double got = allocation_at(src, mu).r_total;
    if (std::abs(got - r_total) <= kBudgetResidual * 0.125) break;
    (got > r_total ? lo : hi) = mu;
  }
  out.mu = mu;
  out.alloc = allocation_at(src, out.mu);
  out.R = out.alloc.R_total;
  return out;
}

double eta_product(const ProductGaussSource& src) {
  double best = 0.0;
  for (const Efficiency& e : src.components) best = std::max(best, e.beta_plus());
  return best;
}

}  // namespace skc
