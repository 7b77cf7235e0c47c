#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "skc/errors.hpp"
#include "skc/exec.hpp"

namespace skc {

// Finitely supported (cross-)covariance sequence; S(w) = sum_k t_k e^{ikw}.
struct Acov {
  int kmin = 0;                // lag of coeffs.front()
  std::vector<double> coeffs;  // lags kmin .. kmin + size - 1

  // Even extension of a one-sided sequence {t_0, t_1, ...}: t_{-k} = t_k.
  static Acov even(const std::vector<double>& one_sided);

  std::complex<double> eval(double omega) const;
  int max_abs_lag() const;
};

// A spectral density or cross-density, either covariance-backed (evaluable at
// any frequency) or sampled on the uniform grid w_j = 2 pi j / n (evaluable
// at grid nodes only).
class SpectralFunction {
 public:
  static SpectralFunction from_acov(Acov a);
  static SpectralFunction from_grid(std::vector<std::complex<double>> samples);

  bool grid_backed() const { return grid_; }
  int grid_size() const { return static_cast<int>(samples_.size()); }
  const Acov& acov() const;

  // Grid-backed functions require omega within 1e-9 of a node.
  std::complex<double> eval(double omega) const;

 private:
  bool grid_ = false;
  Acov acov_;
  std::vector<std::complex<double>> samples_;
};

struct SpectrumTriple {
  SpectralFunction sx, sy, sz;   // real nonnegative densities
  SpectralFunction sxy, sxz;     // cross densities, complex in general
};

// Validates realness/nonnegativity of the densities and the Cauchy-Schwarz
// bounds |S_xy|^2 <= S_x S_y, |S_xz|^2 <= S_x S_z on a probe grid; all
// grid-backed members must share one grid size (LengthMismatch).
SpectrumTriple make_spectrum_triple(SpectralFunction sx, SpectralFunction sy,
                                    SpectralFunction sz, SpectralFunction sxy,
                                    SpectralFunction sxz, int probe = 1024);

// beta(w) = (|S_xy|^2 S_z - |S_xz|^2 S_y) / (S_x S_y S_z - |S_xy|^2 S_z).
// Throws UndefinedBeta when the product of densities vanishes or the
// legitimate coherence saturates at w.
double beta_omega(const SpectrumTriple& s, double omega);

struct WaterfillPoint {
  double mu = 0.0;
  double r = 0.0;
  double R = 0.0;
  int skipped = 0;  // grid nodes where beta was undefined (measure-zero set)
};

// Frequency water-filling: r = (1/4pi) int_{beta>mu} ln(beta(mu+1)/((beta+1)mu)),
// R = (1/4pi) int_{beta>mu} ln((beta+1)/(mu+1)), midpoint rule on `resolution`
// nodes (grid-backed spectra force their own nodes; resolution must match).
// Rejects spectra with min S_z <= 0 on the grid (IllConditioned): the
// unbounded-eavesdropper-noise regime is undefined. Throws NonpositiveMu.
WaterfillPoint spectral_waterfill(const SpectrumTriple& s, double mu,
                                  int resolution = 1 << 14,
                                  ExecMode mode = ExecMode::Parallel);

// Optimal auxiliary design correlation rho_ux(w) at slope mu; 0 on inactive
// frequencies.
double rho_ux_design(const SpectrumTriple& s, double mu, double omega);

// sup over the grid of beta^+(w); undefined nodes are skipped.
double eta_spectrum(const SpectrumTriple& s, int resolution = 1 << 14);

struct FiniteNApprox {
  double r = 0.0;
  double R = 0.0;
  std::vector<double> betas;  // beta at w_i = 2 pi i / n, i = 0..n-1
};

// Finite-n product-source approximation from circulant spectrum samples:
// f_n, g_n = (1/2n) sum over active samples. Throws UndefinedBeta at a
// sample frequency.
FiniteNApprox finite_n_product_approx(const SpectrumTriple& s, int n, double mu);

// T_n(i,j) = t_{i-j}; requires support < n (SupportTooWide).
Eigen::MatrixXd toeplitz_of(const Acov& a, int n);

// First-row circulant coefficients, by the wrap-sum and by the inverse DFT of
// spectrum samples; the two agree for Wiener-class sequences.
std::vector<std::complex<double>> circulant_coeffs_wrap(const Acov& a, int n);
std::vector<std::complex<double>> circulant_coeffs_dft(const SpectralFunction& f, int n);

// C(i,j) = c_{(j-i) mod n} from the sampled spectrum; real symmetric output
// (requires a real even spectrum, else IllConditioned).
Eigen::MatrixXd circulant_of(const SpectralFunction& f, int n);

// |A| = sqrt(tr(A^T A)/n), the dimension-normalized Frobenius norm.
double weak_norm(const Eigen::MatrixXd& a);

struct EqualDistributionReport {
  std::vector<double> moment_gaps;  // |avg F(eig A) - avg F(eig B)| per F
  double kolmogorov = 0.0;          // sup-distance of empirical eigenvalue CDFs
};

EqualDistributionReport equal_distribution_report(
    const Eigen::VectorXd& eig_a, const Eigen::VectorXd& eig_b,
    const std::vector<std::function<double(double)>>& tests);

// Real orthogonal sine/cosine basis that diagonalizes symmetric circulants;
// for even n the degenerate Nyquist sine column is replaced by the
// alternating-sign cosine column.
Eigen::MatrixXd sincos_matrix(int n);

}  // namespace skc
