#include "skc/oneshot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace skc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr long kEnumerationBudget = 1 << 16;

// P[i > tau] evaluator over the sorted atom list.
struct TailCdf {
  std::vector<double> values;  // ascending
  std::vector<double> tail;    // tail[i] = P[value > values[i-1]] convention below

  explicit TailCdf(std::vector<InfoAtom> atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const InfoAtom& a, const InfoAtom& b) { return a.value < b.value; });
    values.reserve(atoms.size());
    std::vector<double> probs;
    for (const auto& a : atoms) {
      values.push_back(a.value);
      probs.push_back(a.prob);
    }
    tail.assign(values.size() + 1, 0.0);
    for (std::size_t i = values.size(); i-- > 0;) tail[i] = tail[i + 1] + probs[i];
  }

  double prob_greater(double t) const {
    const auto it = std::upper_bound(values.begin(), values.end(), t);
    return tail[static_cast<std::size_t>(it - values.begin())];
  }
  double prob_leq(double t) const { return tail[0] - prob_greater(t); }
  double min_value() const { return values.front(); }
  double max_value() const { return values.back(); }
};

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * i / std::max(1, n - 1));
  return g;
}

std::vector<double> default_positive_grid(const TailCdf& dist) {
  const double lo = 1e-9;
  const double hi = std::max(dist.max_value() + 1.0, lo * 10.0);
  return log_spaced(lo, hi, 64);
}

void check_user_grid(const std::vector<double>& g, bool user, const char* name) {
  if (user && g.empty()) throw GridEmpty(std::string(name) + " grid is empty");
  for (double v : g)
    if (!(v > 0.0))
      throw ValidationError(std::string(name) + " grid entries must be positive");
}

double covering_term(const TailCdf& dist, const std::vector<double>& taus, double mden) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : taus)
    best = std::min(best, dist.prob_greater(t) + 0.5 * std::sqrt(std::exp(t) / mden));
  return best;
}

long pack(long w, long k, long l, long m1, long m2) { return (w * m1 + k) * m2 + l; }

double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace

void validate(const OneshotInstance& inst) {
  validate(inst.source);
  if (inst.channel.rows() != inst.source.nx || inst.channel.cols() < 1)
    throw LengthMismatch("channel must have |X| rows");
  if (inst.channel.minCoeff() < -1e-12)
    throw ValidationError("negative channel entry");
  for (Eigen::Index x = 0; x < inst.channel.rows(); ++x)
    if (std::abs(inst.channel.row(x).sum() - 1.0) > 1e-12)
      throw ValidationError("channel row " + std::to_string(x) + " does not sum to 1");
  if (inst.m < 1 || inst.m1 < 1 || inst.m2 < 1)
    throw ValidationError("codebook dimensions must be >= 1");
}

std::vector<InfoAtom> info_density_distribution(const Eigen::MatrixXd& joint) {
  if (joint.size() == 0) throw LengthMismatch("empty joint pmf");
  if (joint.minCoeff() < -1e-12) throw ValidationError("negative pmf entry");
  if (joint.sum() <= 0.0) throw ZeroMarginal("joint pmf carries no mass");
  const VectorXd pa = joint.rowwise().sum();
  const VectorXd pb = joint.colwise().sum().transpose();
  std::vector<InfoAtom> atoms;
  for (Eigen::Index a = 0; a < joint.rows(); ++a)
    for (Eigen::Index b = 0; b < joint.cols(); ++b) {
      const double p = joint(a, b);
      if (p <= 0.0) continue;
      if (pa[a] <= 0.0 || pb[b] <= 0.0)
        throw ZeroMarginal("charged atom with vanishing marginal");
      atoms.push_back({std::log(p / (pa[a] * pb[b])), p});
    }
  return atoms;
}

BoundReport compute_bounds(const OneshotInstance& inst, const BoundGrids& grids) {
  validate(inst);
  const DiscreteJoint& src = inst.source;
  const MatrixXd pxy = src.xy();
  const MatrixXd pxz = src.xz();
  const VectorXd px = pxy.rowwise().sum();
  const auto nu = inst.channel.cols();

  MatrixXd pux(nu, src.nx), puy = MatrixXd::Zero(nu, src.ny),
      puz = MatrixXd::Zero(nu, src.nz);
  for (Eigen::Index u = 0; u < nu; ++u)
    for (int x = 0; x < src.nx; ++x) {
      pux(u, x) = inst.channel(x, u) * px[x];
      for (int y = 0; y < src.ny; ++y) puy(u, y) += inst.channel(x, u) * pxy(x, y);
      for (int z = 0; z < src.nz; ++z) puz(u, z) += inst.channel(x, u) * pxz(x, z);
    }

  const TailCdf d_ux(info_density_distribution(pux));
  const TailCdf d_uy(info_density_distribution(puy));
  const TailCdf d_uz(info_density_distribution(puz));

  check_user_grid(grids.tau, grids.user_tau, "tau");
  check_user_grid(grids.gamma, grids.user_gamma, "gamma");
  check_user_grid(grids.delta, grids.user_delta, "delta");

  const double m = static_cast<double>(inst.m);
  const double m1 = static_cast<double>(inst.m1);
  const double m2 = static_cast<double>(inst.m2);

  BoundReport rep;
  {
    const std::vector<double> taus =
        grids.tau.empty() ? default_positive_grid(d_uz) : grids.tau;
    rep.t1 = covering_term(d_uz, taus, m * m2);
    rep.t2 = covering_term(d_uz, taus, m2);
  }
  {
    const std::vector<double> taus =
        grids.tau.empty() ? default_positive_grid(d_ux) : grids.tau;
    rep.t3 = covering_term(d_ux, taus, m * m1 * m2);
  }
  {
    const std::vector<double> gammas =
        grids.gamma.empty() ? log_spaced(1e-6, 40.0, 64) : grids.gamma;
    const double thr = std::log(m1 * m2 - 1.0);  // -inf for M1 M2 = 1
    double best = std::numeric_limits<double>::infinity();
    for (double g : gammas)
      best = std::min(best, d_uy.prob_leq(thr + g) + std::exp(-g));
    rep.epsilon = best;
  }
  rep.epsilon_star = 2.0 * (rep.t3 + rep.epsilon);
  rep.t_star = 4.0 * (rep.t1 + rep.t2 + 3.0 * rep.t3);
  rep.mean_error_rhs = rep.t3 + rep.epsilon;
  {
    const double cap = std::exp(-1.0) * std::pow(m1, 1.5);
    const std::vector<double> deltas =
        grids.delta.empty() ? log_spaced(1e-12, cap * (1.0 - 1e-9), 64) : grids.delta;
    double best = std::numeric_limits<double>::infinity();
    double best_mean = std::numeric_limits<double>::infinity();
    for (double d : deltas) {
      if (!(d < cap)) continue;
      const double lg = std::log(std::pow(m1, 1.5) / d);
      best = std::min(best, (rep.t_star + 8.0 * d) * lg);
      best_mean = std::min(best_mean,
                           2.0 * lg * (rep.t1 + rep.t2 + 3.0 * rep.t3 + 2.0 * d));
    }
    rep.leakage_rhs = best;
    rep.mean_leakage_rhs = best_mean;
  }
  return rep;
}

CodebookSystem build_system(const OneshotInstance& inst, std::uint64_t seed) {
  validate(inst);
  const long total = inst.m * inst.m1 * inst.m2;
  if (total > kEnumerationBudget)
    throw CapacityExceeded("M*M1*M2 = " + std::to_string(total) +
                           " exceeds the exact-enumeration budget " +
                           std::to_string(kEnumerationBudget));

  CodebookSystem sys;
  sys.inst = inst;
  sys.seed = seed;
  const DiscreteJoint& src = inst.source;
  const MatrixXd pxy = src.xy();
  const VectorXd px = pxy.rowwise().sum();
  const auto nu = inst.channel.cols();

  VectorXd pu = VectorXd::Zero(nu);
  for (Eigen::Index u = 0; u < nu; ++u)
    for (int x = 0; x < src.nx; ++x) pu[u] += inst.channel(x, u) * px[x];

  std::mt19937_64 rng(detail::splitmix64(seed));
  std::vector<double> cum(static_cast<std::size_t>(nu));
  double acc = 0.0;
  for (Eigen::Index u = 0; u < nu; ++u) cum[static_cast<std::size_t>(u)] = (acc += pu[u]);
  sys.codebook.resize(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) {
    const double t = uniform01(rng) * acc;
    sys.codebook[static_cast<std::size_t>(i)] = static_cast<int>(
        std::upper_bound(cum.begin(), cum.end(), t) - cum.begin());
    if (sys.codebook[static_cast<std::size_t>(i)] >= nu)
      sys.codebook[static_cast<std::size_t>(i)] = static_cast<int>(nu - 1);
  }

  // Likelihood encoder: weights proportional to the reverse channel at the
  // codeword symbol, normalized per source symbol.
  sys.enc_weight = MatrixXd::Zero(src.nx, total);
  for (int x = 0; x < src.nx; ++x) {
    for (long i = 0; i < total; ++i) {
      const int u = sys.codebook[static_cast<std::size_t>(i)];
      const double rev = pu[u] > 0.0 ? inst.channel(x, u) * px[x] / pu[u] : 0.0;
      sys.enc_weight(x, i) = rev;
    }
    const double z = sys.enc_weight.row(x).sum();
    if (z <= 0.0)
      throw DegenerateChannel("likelihood encoder has no support at x=" +
                              std::to_string(x));
    sys.enc_weight.row(x) /= z;
  }

  // Exact posterior decoder for (k, l) given the public seed and Y.
  sys.dec_k.assign(static_cast<std::size_t>(inst.m) * src.ny, 0);
  for (long w = 0; w < inst.m; ++w)
    for (int y = 0; y < src.ny; ++y) {
      double best = -1.0;
      long best_kl = 0;
      for (long k = 0; k < inst.m1; ++k)
        for (long l = 0; l < inst.m2; ++l) {
          const long idx = pack(w, k, l, inst.m1, inst.m2);
          double score = 0.0;
          for (int x = 0; x < src.nx; ++x) score += pxy(x, y) * sys.enc_weight(x, idx);
          if (score > best) {
            best = score;
            best_kl = k * inst.m2 + l;
          }
        }
      sys.dec_k[static_cast<std::size_t>(w) * src.ny + y] =
          static_cast<int>(best_kl / inst.m2);
    }
  return sys;
}

double exact_error_probability(const CodebookSystem& sys) {
  const DiscreteJoint& src = sys.inst.source;
  const MatrixXd pxy = src.xy();
  const long m1 = sys.inst.m1, m2 = sys.inst.m2;
  double err = 0.0;
  for (int x = 0; x < src.nx; ++x)
    for (int y = 0; y < src.ny; ++y) {
      const double pj = pxy(x, y);
      if (pj <= 0.0) continue;
      double bad = 0.0;
      for (long w = 0; w < sys.inst.m; ++w) {
        const int khat = sys.dec_k[static_cast<std::size_t>(w) * src.ny + y];
        for (long k = 0; k < m1; ++k) {
          if (k == khat) continue;
          for (long l = 0; l < m2; ++l)
            bad += sys.enc_weight(x, pack(w, k, l, m1, m2));
        }
      }
      err += pj * bad;
    }
  return err;
}

double exact_leakage_nats(const CodebookSystem& sys) {
  const DiscreteJoint& src = sys.inst.source;
  const MatrixXd pxz = src.xz();
  const long m = sys.inst.m, m1 = sys.inst.m1, m2 = sys.inst.m2;

  // P(k, w, z) = sum_x P_xz(x, z) sum_l enc_weight(x, (w,k,l))
  std::vector<double> pkwz(static_cast<std::size_t>(m1 * m * src.nz), 0.0);
  for (long w = 0; w < m; ++w)
    for (long k = 0; k < m1; ++k) {
      for (int x = 0; x < src.nx; ++x) {
        double sl = 0.0;
        for (long l = 0; l < m2; ++l) sl += sys.enc_weight(x, pack(w, k, l, m1, m2));
        if (sl == 0.0) continue;
        for (int z = 0; z < src.nz; ++z)
          pkwz[static_cast<std::size_t>((k * m + w) * src.nz + z)] += pxz(x, z) * sl;
      }
    }

  double h_kwz = 0.0;
  std::vector<double> pwz(static_cast<std::size_t>(m * src.nz), 0.0);
  for (long k = 0; k < m1; ++k)
    for (long w = 0; w < m; ++w)
      for (int z = 0; z < src.nz; ++z) {
        const double p = pkwz[static_cast<std::size_t>((k * m + w) * src.nz + z)];
        if (p > 0.0) h_kwz -= p * std::log(p);
        pwz[static_cast<std::size_t>(w * src.nz + z)] += p;
      }
  double h_wz = 0.0;
  for (double p : pwz)
    if (p > 0.0) h_wz -= p * std::log(p);
  return std::log(static_cast<double>(m1)) - (h_kwz - h_wz);
}

SimReport simulate_system(const CodebookSystem& sys, long trials, ExecMode mode) {
  if (trials <= 0) throw ValidationError("trial count must be positive");
  const DiscreteJoint& src = sys.inst.source;
  const long m1 = sys.inst.m1, m2 = sys.inst.m2;
  const long total = sys.inst.m * m1 * m2;

  // Cumulative tables for inverse-CDF sampling.
  std::vector<double> cum_src(src.p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < src.p.size(); ++i) cum_src[i] = (acc += src.p[i]);
  std::vector<std::vector<double>> cum_enc(static_cast<std::size_t>(src.nx));
  for (int x = 0; x < src.nx; ++x) {
    auto& c = cum_enc[static_cast<std::size_t>(x)];
    c.resize(static_cast<std::size_t>(total));
    double a = 0.0;
    for (long i = 0; i < total; ++i)
      c[static_cast<std::size_t>(i)] = (a += sys.enc_weight(x, i));
  }

  constexpr std::int64_t kBlock = 8192;
  const auto errors = detail::blocked_sum<1>(
      trials, mode,
      [&](std::int64_t t, std::array<double, 1>& a) {
        const std::int64_t block = t / kBlock;
        // One stream per fixed-size block, re-derived at the block head, so
        // the sample path is independent of the thread count.
        thread_local std::mt19937_64 rng;
        thread_local std::int64_t rng_block = -1;
        thread_local std::uint64_t rng_seed = 0;
        if (rng_block != block || rng_seed != sys.seed) {
          rng.seed(detail::splitmix64(sys.seed ^ detail::splitmix64(
                                                     0x517cc1b727220a95ULL +
                                                     static_cast<std::uint64_t>(block))));
          rng_block = block;
          rng_seed = sys.seed;
        }
        const double u1 = uniform01(rng) * cum_src.back();
        const auto flat = static_cast<long>(
            std::upper_bound(cum_src.begin(), cum_src.end(), u1) - cum_src.begin());
        const long xi = std::min<long>(flat, static_cast<long>(cum_src.size()) - 1);
        const int z = static_cast<int>(xi % src.nz);
        const int y = static_cast<int>((xi / src.nz) % src.ny);
        const int x = static_cast<int>(xi / (static_cast<long>(src.ny) * src.nz));
        (void)z;
        const auto& c = cum_enc[static_cast<std::size_t>(x)];
        const double u2 = uniform01(rng) * c.back();
        auto idx = static_cast<long>(std::upper_bound(c.begin(), c.end(), u2) - c.begin());
        idx = std::min(idx, total - 1);
        const long w = idx / (m1 * m2);
        const long k = (idx / m2) % m1;
        if (sys.dec_k[static_cast<std::size_t>(w) * src.ny + y] != k) a[0] += 1.0;
      },
      kBlock);

  SimReport rep;
  rep.trials = trials;
  rep.error_rate = errors[0] / static_cast<double>(trials);
  rep.ci95_half =
      1.96 * std::sqrt(std::max(0.0, rep.error_rate * (1.0 - rep.error_rate)) /
                       static_cast<double>(trials));
  rep.exact_error = exact_error_probability(sys);
  rep.exact_leakage = exact_leakage_nats(sys);
  return rep;
}

}  // namespace skc
