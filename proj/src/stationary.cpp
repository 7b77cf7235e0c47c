#include "skc/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace skc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRealTol = 1e-12;

double norm2(const std::complex<double>& z) { return std::norm(z); }

struct NodeSet {
  int n = 0;
  bool grid_nodes = false;  // w_j = 2 pi j / n (grid-backed) vs midpoints
  double at(int j) const {
    return grid_nodes ? kTwoPi * j / n : kTwoPi * (j + 0.5) / n;
  }
};

// Grid-backed members pin both the node count and the node positions.
NodeSet node_set(const SpectrumTriple& s, int resolution) {
  int grid_n = 0;
  for (const SpectralFunction* f : {&s.sx, &s.sy, &s.sz, &s.sxy, &s.sxz}) {
    if (!f->grid_backed()) continue;
    if (grid_n == 0) grid_n = f->grid_size();
  }
  if (grid_n == 0) return {resolution, false};
  if (resolution != grid_n)
    throw LengthMismatch("resolution " + std::to_string(resolution) +
                         " does not match the sample grid of size " +
                         std::to_string(grid_n));
  return {grid_n, true};
}

struct BetaParts {
  double beta = 0.0;
  double rho2_xy = 0.0;
  double rho2_xz = 0.0;
};

BetaParts beta_parts_at(const SpectrumTriple& s, double w) {
  const double sx = s.sx.eval(w).real();
  const double sy = s.sy.eval(w).real();
  const double sz = s.sz.eval(w).real();
  const double cxy = norm2(s.sxy.eval(w));
  const double cxz = norm2(s.sxz.eval(w));
  const double prod = sx * sy * sz;
  if (!(prod > 0.0))
    throw UndefinedBeta("beta undefined at omega=" + std::to_string(w) +
                        ": vanishing spectral density");
  const double r2xy = cxy / (sx * sy);
  const double r2xz = cxz / (sx * sz);
  if (r2xy >= 1.0 - 1e-14)
    throw UndefinedBeta("beta undefined at omega=" + std::to_string(w) +
                        ": legitimate coherence saturated");
  return {(r2xy - r2xz) / (1.0 - r2xy), r2xy, r2xz};
}

}  // namespace

Acov Acov::even(const std::vector<double>& one_sided) {
  if (one_sided.empty()) throw LengthMismatch("empty autocovariance");
  Acov a;
  const int K = static_cast<int>(one_sided.size()) - 1;
  a.kmin = -K;
  a.coeffs.resize(2 * static_cast<std::size_t>(K) + 1);
  for (int k = -K; k <= K; ++k)
    a.coeffs[static_cast<std::size_t>(k + K)] = one_sided[static_cast<std::size_t>(std::abs(k))];
  return a;
}

std::complex<double> Acov::eval(double omega) const {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double k = static_cast<double>(kmin + static_cast<int>(i));
    acc += coeffs[i] * std::complex<double>(std::cos(k * omega), std::sin(k * omega));
  }
  return acc;
}

int Acov::max_abs_lag() const {
  const int kmax = kmin + static_cast<int>(coeffs.size()) - 1;
  return std::max(std::abs(kmin), std::abs(kmax));
}

SpectralFunction SpectralFunction::from_acov(Acov a) {
  SpectralFunction f;
  f.acov_ = std::move(a);
  return f;
}

SpectralFunction SpectralFunction::from_grid(std::vector<std::complex<double>> samples) {
  if (samples.empty()) throw GridEmpty("empty sample grid");
  SpectralFunction f;
  f.grid_ = true;
  f.samples_ = std::move(samples);
  return f;
}

const Acov& SpectralFunction::acov() const {
  if (grid_) throw ValidationError("grid-backed spectral function has no acov");
  return acov_;
}

std::complex<double> SpectralFunction::eval(double omega) const {
  if (!grid_) return acov_.eval(omega);
  const int n = grid_size();
  const double pos = omega / kTwoPi * n;
  const auto j = static_cast<long>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(j)) > 1e-9 * n)
    throw ValidationError("grid-backed spectrum sampled off-grid at omega=" +
                          std::to_string(omega));
  long jm = j % n;
  if (jm < 0) jm += n;
  return samples_[static_cast<std::size_t>(jm)];
}

SpectrumTriple make_spectrum_triple(SpectralFunction sx, SpectralFunction sy,
                                    SpectralFunction sz, SpectralFunction sxy,
                                    SpectralFunction sxz, int probe) {
  SpectrumTriple t{std::move(sx), std::move(sy), std::move(sz),
                   std::move(sxy), std::move(sxz)};
  int grid_n = 0;
  for (const SpectralFunction* f : {&t.sx, &t.sy, &t.sz, &t.sxy, &t.sxz}) {
    if (!f->grid_backed()) continue;
    if (grid_n == 0) grid_n = f->grid_size();
    if (f->grid_size() != grid_n)
      throw LengthMismatch("sample grids of mixed sizes in one spectrum triple");
  }
  const NodeSet nodes = node_set(t, grid_n == 0 ? probe : grid_n);
  for (int j = 0; j < nodes.n; ++j) {
    const double w = nodes.at(j);
    for (const SpectralFunction* f : {&t.sx, &t.sy, &t.sz}) {
      const std::complex<double> v = f->eval(w);
      if (std::abs(v.imag()) > kRealTol * std::max(1.0, std::abs(v.real())))
        throw ValidationError("spectral density has imaginary mass at omega=" +
                              std::to_string(w));
      if (v.real() < -kRealTol)
        throw ValidationError("negative spectral density at omega=" + std::to_string(w));
    }
    const double sxv = t.sx.eval(w).real(), syv = t.sy.eval(w).real(),
                 szv = t.sz.eval(w).real();
    if (norm2(t.sxy.eval(w)) > sxv * syv * (1.0 + 1e-9) + 1e-12)
      throw ValidationError("|S_xy|^2 exceeds S_x S_y at omega=" + std::to_string(w));
    if (norm2(t.sxz.eval(w)) > sxv * szv * (1.0 + 1e-9) + 1e-12)
      throw ValidationError("|S_xz|^2 exceeds S_x S_z at omega=" + std::to_string(w));
  }
  return t;
}

double beta_omega(const SpectrumTriple& s, double omega) {
  return beta_parts_at(s, omega).beta;
}

WaterfillPoint spectral_waterfill(const SpectrumTriple& s, double mu,
                                  int resolution, ExecMode mode) {
  if (!(mu > 0.0)) throw NonpositiveMu("slope mu must be positive");
  if (resolution <= 0) throw GridEmpty("resolution must be positive");
  const NodeSet nodes = node_set(s, resolution);

  for (int j = 0; j < nodes.n; ++j) {
    const double szv = s.sz.eval(nodes.at(j)).real();
    if (!(szv > 0.0))
      throw IllConditioned(
          "spectral water-filling undefined: S_z(omega) vanishes at omega=" +
          std::to_string(nodes.at(j)));
  }

  const auto acc = detail::blocked_sum<3>(
      nodes.n, mode, [&](std::int64_t j, std::array<double, 3>& a) {
        double b;
        try {
          b = beta_parts_at(s, nodes.at(static_cast<int>(j))).beta;
        } catch (const UndefinedBeta&) {
          a[2] += 1.0;  // measure-zero defect: skip and count
          return;
        }
        if (b > mu) {
          a[0] += std::log(b * (mu + 1.0) / ((b + 1.0) * mu));
          a[1] += std::log((b + 1.0) / (mu + 1.0));
        }
      });

  WaterfillPoint p;
  p.mu = mu;
  p.r = acc[0] / (2.0 * nodes.n);
  p.R = acc[1] / (2.0 * nodes.n);
  p.skipped = static_cast<int>(acc[2]);
  if (p.skipped == nodes.n)
    throw UndefinedBeta("beta undefined at every grid node");
  return p;
}

double rho_ux_design(const SpectrumTriple& s, double mu, double omega) {
  if (!(mu > 0.0)) throw NonpositiveMu("slope mu must be positive");
  const BetaParts bp = beta_parts_at(s, omega);
  if (bp.beta <= mu) return 0.0;
  const double num = (1.0 + mu) * bp.rho2_xy - bp.rho2_xz - mu;
  const double den = bp.rho2_xy - (1.0 + mu) * bp.rho2_xz + mu * bp.rho2_xy * bp.rho2_xz;
  return std::sqrt(num / den);
}

double eta_spectrum(const SpectrumTriple& s, int resolution) {
  if (resolution <= 0) throw GridEmpty("resolution must be positive");
  const NodeSet nodes = node_set(s, resolution);
  double best = 0.0;
  int defined = 0;
  for (int j = 0; j < nodes.n; ++j) {
    try {
      best = std::max(best, beta_parts_at(s, nodes.at(j)).beta);
      ++defined;
    } catch (const UndefinedBeta&) {
    }
  }
  if (defined == 0) throw UndefinedBeta("beta undefined at every grid node");
  return best;
}

FiniteNApprox finite_n_product_approx(const SpectrumTriple& s, int n, double mu) {
  if (!(mu > 0.0)) throw NonpositiveMu("slope mu must be positive");
  if (n <= 0) throw GridEmpty("n must be positive");
  FiniteNApprox out;
  out.betas.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.betas[static_cast<std::size_t>(i)] = beta_omega(s, kTwoPi * i / n);
  for (double b : out.betas) {
    if (b > mu) {
      out.r += std::log(b * (mu + 1.0) / ((b + 1.0) * mu));
      out.R += std::log((b + 1.0) / (mu + 1.0));
    }
  }
  out.r /= 2.0 * n;
  out.R /= 2.0 * n;
  return out;
}

Eigen::MatrixXd toeplitz_of(const Acov& a, int n) {
  if (n <= 0) throw GridEmpty("matrix order must be positive");
  if (a.max_abs_lag() >= n)
    throw SupportTooWide("covariance support " + std::to_string(a.max_abs_lag()) +
                         " too wide for order " + std::to_string(n));
  const int kmax = a.kmin + static_cast<int>(a.coeffs.size()) - 1;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = i - j;
      if (k >= a.kmin && k <= kmax)
        t(i, j) = a.coeffs[static_cast<std::size_t>(k - a.kmin)];
    }
  return t;
}

std::vector<std::complex<double>> circulant_coeffs_wrap(const Acov& a, int n) {
  if (n <= 0) throw GridEmpty("matrix order must be positive");
  const int kmax = a.kmin + static_cast<int>(a.coeffs.size()) - 1;
  std::vector<std::complex<double>> c(static_cast<std::size_t>(n), 0.0);
  // c_k = sum_m t_{-k + m n}
  for (int k = 0; k < n; ++k) {
    const int lo_m = static_cast<int>(std::ceil((a.kmin + k) / static_cast<double>(n)));
    const int hi_m = static_cast<int>(std::floor((kmax + k) / static_cast<double>(n)));
    for (int m = lo_m; m <= hi_m; ++m) {
      const int lag = -k + m * n;
      if (lag >= a.kmin && lag <= kmax)
        c[static_cast<std::size_t>(k)] += a.coeffs[static_cast<std::size_t>(lag - a.kmin)];
    }
  }
  return c;
}

std::vector<std::complex<double>> circulant_coeffs_dft(const SpectralFunction& f, int n) {
  if (n <= 0) throw GridEmpty("matrix order must be positive");
  if (f.grid_backed() && f.grid_size() != n)
    throw LengthMismatch("sample grid size does not match requested order");
  std::vector<std::complex<double>> c(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double ang = kTwoPi * j * k / n;
      acc += f.eval(kTwoPi * j / n) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    c[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
  }
  return c;
}

Eigen::MatrixXd circulant_of(const SpectralFunction& f, int n) {
  const auto c = circulant_coeffs_dft(f, n);
  for (const auto& v : c)
    if (std::abs(v.imag()) > 1e-10)
      throw IllConditioned("circulant diagnostics require a real even spectrum");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = c[static_cast<std::size_t>(((j - i) % n + n) % n)].real();
  return m;
}

double weak_norm(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) throw LengthMismatch("empty matrix");
  return a.norm() / std::sqrt(static_cast<double>(a.rows()));
}

EqualDistributionReport equal_distribution_report(
    const Eigen::VectorXd& eig_a, const Eigen::VectorXd& eig_b,
    const std::vector<std::function<double(double)>>& tests) {
  if (eig_a.size() != eig_b.size() || eig_a.size() == 0)
    throw LengthMismatch("eigenvalue lists must be nonempty and equally long");
  const auto n = static_cast<std::size_t>(eig_a.size());
  EqualDistributionReport rep;
  for (const auto& f : tests) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += f(eig_a[static_cast<Eigen::Index>(i)]);
      mb += f(eig_b[static_cast<Eigen::Index>(i)]);
    }
    rep.moment_gaps.push_back(std::abs(ma - mb) / static_cast<double>(n));
  }
  std::vector<double> a(eig_a.data(), eig_a.data() + eig_a.size());
  std::vector<double> b(eig_b.data(), eig_b.data() + eig_b.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ks = 0.0;
  for (const auto& probe : {a, b})
    for (double x : probe) {
      const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / n;
      const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / n;
      ks = std::max(ks, std::abs(fa - fb));
    }
  rep.kolmogorov = ks;
  return rep;
}

Eigen::MatrixXd sincos_matrix(int n) {
  if (n <= 0) throw GridEmpty("matrix order must be positive");
  Eigen::MatrixXd q(n, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double sqrt_2n = std::sqrt(2.0 / static_cast<double>(n));
  for (int i = 0; i < n; ++i) q(i, 0) = inv_sqrt_n;
  int col = 1;
  for (int j = 1; 2 * j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      q(i, col) = sqrt_2n * std::cos(kTwoPi * i * j / n);
      q(i, col + 1) = sqrt_2n * std::sin(kTwoPi * i * j / n);
    }
    col += 2;
  }
  if (n % 2 == 0) {
    // The Nyquist sine column vanishes; the alternating cosine column keeps
    // the basis orthogonal.
    for (int i = 0; i < n; ++i) q(i, col) = (i % 2 == 0 ? 1.0 : -1.0) * inv_sqrt_n;
  }
  return q;
}

}  // namespace skc
