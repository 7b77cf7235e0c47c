// Times the parallel kernels against the serial reference implementation and
// verifies that both produce bitwise identical results.

#include <chrono>
#include <cstdio>
#include <string>

#include "skc/oneshot.hpp"
#include "skc/stationary.hpp"

using namespace skc;

namespace {

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel, bool identical) {
  std::printf("%-24s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n",
              name.c_str(), serial * 1e3, parallel * 1e3, serial / parallel,
              identical ? "bitwise-identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
  {
    const SpectrumTriple s = make_spectrum_triple(
        SpectralFunction::from_acov(Acov::even({1.0, 0.3})),
        SpectralFunction::from_acov(Acov::even({1.25, 0.3})),
        SpectralFunction::from_acov(Acov::even({2.0, 0.3})),
        SpectralFunction::from_acov(Acov::even({1.0, 0.3})),
        SpectralFunction::from_acov(Acov::even({1.0, 0.3})));
    const int n = 1 << 21;
    WaterfillPoint ser, par;
    const double ts = time_best_of(
        3, [&] { ser = spectral_waterfill(s, 0.8, n, ExecMode::Serial); });
    const double tp = time_best_of(
        3, [&] { par = spectral_waterfill(s, 0.8, n, ExecMode::Parallel); });
    row("spectral_waterfill", ts, tp, ser.r == par.r && ser.R == par.R);
  }

  {
    OneshotInstance inst;
    inst.source.nx = inst.source.ny = inst.source.nz = 2;
    inst.source.p.resize(8);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z) {
          const double py = y != x ? 0.1 : 0.9;
          const double pz = z != x ? 0.3 : 0.7;
          inst.source.p[(static_cast<std::size_t>(x) * 2 + y) * 2 + z] =
              0.5 * py * pz;
        }
    inst.channel = Eigen::MatrixXd{{0.75, 0.25}, {0.25, 0.75}};
    inst.m = inst.m1 = inst.m2 = 2;
    const CodebookSystem sys = build_system(inst, 1);
    const long trials = 2'000'000;
    SimReport ser, par;
    const double ts =
        time_best_of(3, [&] { ser = simulate_system(sys, trials, ExecMode::Serial); });
    const double tp = time_best_of(
        3, [&] { par = simulate_system(sys, trials, ExecMode::Parallel); });
    row("simulate_system", ts, tp, ser.error_rate == par.error_rate);
  }
  return 0;
}
