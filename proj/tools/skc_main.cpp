#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "skc/model_io.hpp"

using namespace skc;

namespace {

constexpr double kLn2 = 0.6931471805599453;

struct Options {
  std::string model_path;
  double mu_min = 0.05;
  double mu_max = 2.0;
  int points = 33;
  std::string unit;  // "", "bits" or "nats"
  int grid = 1 << 14;
  int ladder_cap = 512;  // diagnose ladder top; follows --grid when given
  std::uint64_t seed = 1;
  long trials = 10000;
  double tol = 1e-9;
  std::string out;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Rates are internally in nats; the unit divisor rescales on output.
double unit_div(const Options& o, const ModelFile& m) {
  if (o.unit == "bits") return kLn2;
  if (o.unit == "nats") return 1.0;
  return m.unit == Unit::Bits ? kLn2 : 1.0;
}

void deliver(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ComputeError("cannot write output file: " + o.out);
  f << text;
}

[[noreturn]] void wrong_kind(const std::string& kind, const std::string& sub) {
  throw ValidationError("/kind: model kind '" + kind + "' is not usable with '" +
                        sub + "'");
}

std::vector<double> mu_grid(const Options& o) {
  if (!(o.mu_min > 0.0) || !(o.mu_max >= o.mu_min) || o.points < 1)
    throw ValidationError("mu grid needs 0 < mu-min <= mu-max and points >= 1");
  std::vector<double> g(static_cast<std::size_t>(o.points));
  const double llo = std::log(o.mu_min), lhi = std::log(o.mu_max);
  for (int i = 0; i < o.points; ++i)
    g[static_cast<std::size_t>(i)] =
        std::exp(lhi + (llo - lhi) * i / std::max(1, o.points - 1));
  return g;  // descending, so r and R ascend down the file
}

std::string curve_csv(const std::vector<CurvePoint>& pts, double div) {
  std::string s = "mu,r,R\n";
  for (const CurvePoint& p : pts)
    s += g17(p.mu) + "," + g17(p.r / div) + "," + g17(p.R / div) + "\n";
  return s;
}

int run_curve(const Options& o) {
  const ModelFile m = load_model(o.model_path);
  const double div = unit_div(o, m);
  std::vector<CurvePoint> pts;
  const std::vector<double> grid = mu_grid(o);
  if (const auto* t = std::get_if<ScalarGaussTriple>(&m.payload)) {
    const Efficiency e = beta_of(*t);
    for (double mu : grid) {
      const RatePoint p = rate_point_from_mu(e, mu);
      pts.push_back({mu, p.r, p.R, {}});
    }
  } else if (const auto* p = std::get_if<ProductGaussSource>(&m.payload)) {
    for (double mu : grid) pts.push_back(product_curve_point(*p, mu));
  } else if (const auto* v = std::get_if<GaussVectorModel>(&m.payload)) {
    pts = vector_curve(*v, grid, o.tol);
  } else if (const auto* s = std::get_if<SpectrumTriple>(&m.payload)) {
    for (double mu : grid) {
      const WaterfillPoint w = spectral_waterfill(*s, mu, o.grid);
      pts.push_back({w.mu, w.r, w.R, {}});
    }
  } else {
    wrong_kind(m.kind, "curve");
  }
  deliver(o, curve_csv(pts, div));
  return 0;
}

int run_eta(const Options& o) {
  const ModelFile m = load_model(o.model_path);
  std::ostringstream out;
  if (const auto* t = std::get_if<ScalarGaussTriple>(&m.payload)) {
    out << "eta " << g17(eta_scalar(*t)) << "\nmethod scalar-beta-plus\n";
  } else if (const auto* p = std::get_if<ProductGaussSource>(&m.payload)) {
    out << "eta " << g17(eta_product(*p)) << "\nmethod product-max-beta\n";
  } else if (const auto* v = std::get_if<GaussVectorModel>(&m.payload)) {
    try {
      out << "eta " << g17(eta_vector(*v)) << "\nmethod vector-spectral\n";
    } catch (const SaturatedCorrelation&) {
      out << "eta inf\nmethod vector-spectral (saturated legitimate channel)\n";
    }
  } else if (const auto* s = std::get_if<SpectrumTriple>(&m.payload)) {
    out << "eta " << g17(eta_spectrum(*s, o.grid)) << "\nmethod spectrum-grid-sup\n";
  } else if (const auto* d = std::get_if<DiscreteJoint>(&m.payload)) {
    SearchConfig cfg;
    cfg.seed = o.seed;
    const SdpiEstimate est = s_star_degraded(*d, cfg);
    const double s = std::isfinite(est.s_extrapolated) && est.s_extrapolated > est.s_lower
                         ? est.s_extrapolated
                         : est.s_lower;
    out << "eta " << g17(eta_from_s(s)) << "\nmethod sdpi-degraded-"
        << (est.method == SdpiMethod::Grid ? "grid" : "perturbation-limit") << "\n";
  } else {
    wrong_kind(m.kind, "eta");
  }
  deliver(o, out.str());
  return 0;
}

int run_diagnose(const Options& o) {
  const ModelFile m = load_model(o.model_path);
  std::ostringstream out;
  if (const auto* v = std::get_if<GaussVectorModel>(&m.payload)) {
    const CanonicalPair cp = canonical_pair(*v);
    const CommutativityReport rep = is_commutative(cp, o.tol);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(cp.g), eh(cp.h);
    out << "commutative " << (rep.commutative ? "true" : "false") << "\n";
    out << "defect " << g17(rep.defect) << "\n";
    out << "g_spectrum";
    for (Eigen::Index i = 0; i < eg.eigenvalues().size(); ++i)
      out << " " << g17(eg.eigenvalues()[i]);
    out << "\nh_spectrum";
    for (Eigen::Index i = 0; i < eh.eigenvalues().size(); ++i)
      out << " " << g17(eh.eigenvalues()[i]);
    out << "\n";
  } else if (const auto* s = std::get_if<SpectrumTriple>(&m.payload)) {
    if (s->sx.grid_backed())
      throw ValidationError(
          "/sx: Toeplitz diagnostics need a covariance-backed source spectrum");
    const Acov& a = s->sx.acov();
    for (int n = 64; n <= std::max(64, o.ladder_cap); n *= 2) {
      const Eigen::MatrixXd t = toeplitz_of(a, n);
      const Eigen::MatrixXd c = circulant_of(s->sx, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(t), ec(c);
      const auto rep = equal_distribution_report(
          et.eigenvalues(), ec.eigenvalues(),
          {[](double x) { return x; }, [](double x) { return x * x; }});
      out << "n=" << n << " weak_norm_gap=" << g17(weak_norm(t - c))
          << " kolmogorov=" << g17(rep.kolmogorov)
          << " moment1=" << g17(rep.moment_gaps[0])
          << " moment2=" << g17(rep.moment_gaps[1]) << "\n";
    }
  } else {
    wrong_kind(m.kind, "diagnose");
  }
  deliver(o, out.str());
  return 0;
}

int run_oneshot(const Options& o) {
  const ModelFile m = load_model(o.model_path);
  const auto* inst = std::get_if<OneshotInstance>(&m.payload);
  if (!inst) wrong_kind(m.kind, "oneshot");
  const double div = unit_div(o, m);
  const BoundReport b = compute_bounds(*inst);
  const CodebookSystem sys = build_system(*inst, o.seed);
  const SimReport sim = simulate_system(sys, o.trials);
  std::ostringstream out;
  out << "t1 " << g17(b.t1) << "\nt2 " << g17(b.t2) << "\nt3 " << g17(b.t3)
      << "\nepsilon " << g17(b.epsilon) << "\nepsilon_star " << g17(b.epsilon_star)
      << "\nt_star " << g17(b.t_star) << "\nleakage_rhs " << g17(b.leakage_rhs / div)
      << "\nmean_error_rhs " << g17(b.mean_error_rhs) << "\nmean_leakage_rhs "
      << g17(b.mean_leakage_rhs / div) << "\ntrials " << sim.trials << "\nerror_rate "
      << g17(sim.error_rate) << "\nci95_half " << g17(sim.ci95_half) << "\nexact_error "
      << g17(sim.exact_error) << "\nexact_leakage " << g17(sim.exact_leakage / div)
      << "\n";
  deliver(o, out.str());
  return 0;
}

int run_sdpi(const Options& o) {
  const ModelFile m = load_model(o.model_path);
  const auto* d = std::get_if<DiscreteJoint>(&m.payload);
  if (!d) wrong_kind(m.kind, "sdpi");
  SearchConfig cfg;
  cfg.seed = o.seed;
  const SdpiEstimate est = s_star_degraded(*d, cfg);
  const double s = std::isfinite(est.s_extrapolated) && est.s_extrapolated > est.s_lower
                       ? est.s_extrapolated
                       : est.s_lower;
  std::ostringstream out;
  out << "s_star " << g17(s) << "\ns_certified " << g17(est.s_lower) << "\neta "
      << g17(eta_from_s(s)) << "\nmethod "
      << (est.method == SdpiMethod::Grid ? "grid" : "perturbation-limit")
      << "\nwitness_q";
  for (Eigen::Index i = 0; i < est.argmax_q.size(); ++i)
    out << " " << g17(est.argmax_q[i]);
  out << "\n";
  deliver(o, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secret-key / communication trade-off calculator"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", o.model_path, "model file (JSON)")->required();
    sub->add_option("--unit", o.unit, "bits|nats (default: the model's unit)")
        ->check(CLI::IsMember({"bits", "nats"}));
    sub->add_option("--out", o.out, "write output to this file instead of stdout");
    sub->add_option("--grid", o.grid, "quadrature resolution / ladder cap");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--trials", o.trials, "Monte Carlo trials");
    sub->add_option("--tol", o.tol, "commutativity tolerance");
  };

  CLI::App* curve = app.add_subcommand("curve", "key-communication curve as CSV");
  add_common(curve);
  curve->add_option("--mu-min", o.mu_min, "smallest slope");
  curve->add_option("--mu-max", o.mu_max, "largest slope");
  curve->add_option("--points", o.points, "number of slopes");

  CLI::App* eta = app.add_subcommand("eta", "key-per-communication efficiency");
  add_common(eta);
  CLI::App* diag = app.add_subcommand("diagnose", "model diagnostics");
  add_common(diag);
  CLI::App* oneshot = app.add_subcommand("oneshot", "one-shot bounds and simulation");
  add_common(oneshot);
  CLI::App* sdpi = app.add_subcommand("sdpi", "SDPI constants for discrete models");
  add_common(sdpi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (diag->count("--grid") > 0) o.ladder_cap = o.grid;

  try {
    if (curve->parsed()) return run_curve(o);
    if (eta->parsed()) return run_eta(o);
    if (diag->parsed()) return run_diagnose(o);
    if (oneshot->parsed()) return run_oneshot(o);
    if (sdpi->parsed()) return run_sdpi(o);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const ComputeError& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
