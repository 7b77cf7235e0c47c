#include "skc/scalar.hpp"

#include <cmath>
#include <string>

namespace skc {

namespace {
constexpr double kSaturationTol = 1e-12;
}

void validate(const ScalarGaussTriple& t) {
  if (!(std::abs(t.rho_xy) <= 1.0) || !(std::abs(t.rho_xz) <= 1.0))
    throw DegenerateCorrelation("correlation outside [-1, 1]: rho_xy=" +
                                std::to_string(t.rho_xy) +
                                " rho_xz=" + std::to_string(t.rho_xz));
  if (std::abs(t.rho_xy) >= 1.0 - kSaturationTol)
    throw DegenerateCorrelation("rho_xy saturated at +-1; key rate unbounded");
}

Efficiency beta_of(const ScalarGaussTriple& t) {
  validate(t);
  const double a = t.rho_xy * t.rho_xy;
  const double b = t.rho_xz * t.rho_xz;
  return {(a - b) / (1.0 - a)};
}

double key_comm(const Efficiency& e, double r) {
  if (!(r >= 0.0))
    throw NegativeRate("communication budget must be >= 0, got " + std::to_string(r));
  const double bp = e.beta_plus();
  return 0.5 * std::log1p(bp * (1.0 - std::exp(-2.0 * r)));
}

RatePoint rate_point_from_mu(const Efficiency& e, double mu) {
  if (!(mu > 0.0))
    throw NonpositiveMu("slope mu must be positive, got " + std::to_string(mu));
  const double b = e.beta;
  if (b <= mu) return {0.0, 0.0};
  return {0.5 * std::log(b * (mu + 1.0) / ((b + 1.0) * mu)),
          0.5 * std::log((b + 1.0) / (mu + 1.0))};
}

double eta_scalar(const ScalarGaussTriple& t) { return beta_of(t).beta_plus(); }

}  // namespace skc
