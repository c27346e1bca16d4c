// Acceptance suite: end-to-end checks of the sampling pipeline against its
// pinned numerical targets.  Run a single criterion with `--criterion N`
// (N in 1..7) or all of them with no arguments; the exit status is the number
// of failed clauses, so 0 means full acceptance.
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nqp/estimator.hpp"
#include "nqp/filter.hpp"
#include "nqp/gaussian_sim.hpp"
#include "nqp/oracle.hpp"
#include "nqp/pattern.hpp"
#include "nqp/rng.hpp"

using namespace nqp;

namespace {

constexpr double kPi = std::numbers::pi;

std::string str(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

class Criterion {
 public:
  Criterion(int id, std::string name) : id_(id), name_(std::move(name)) {}
  void check(bool ok, std::string text) { clauses_.push_back({ok, std::move(text)}); }
  int finish() const {
    int fails = 0;
    for (const auto& c : clauses_)
      if (!c.ok) ++fails;
    std::printf("[%s] criterion %d: %s\n", fails == 0 ? "PASS" : "FAIL", id_,
                name_.c_str());
    for (const auto& c : clauses_)
      std::printf("    [%s] %s\n", c.ok ? "ok" : "FAILED", c.text.c_str());
    std::fflush(stdout);
    return fails;
  }

 private:
  struct Clause {
    bool ok;
    std::string text;
  };
  int id_;
  std::string name_;
  std::vector<Clause> clauses_;
};

const GaussianStateSpec kSqueezed{0.36, 5.28};
const GaussianStateSpec kVacuum{1.0, 1.0};
const GaussianStateSpec kThermal{2.0, 2.0};
constexpr double kWidth = 1.3;
constexpr std::size_t kPhases = 21;
constexpr std::size_t kPerPhase = 100000;
constexpr std::uint64_t kDitherSeed = 101;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

QuadratureDataset dataset_for(const GaussianStateSpec& s, std::uint64_t seed) {
  return simulate_quadratures(s, PhaseGrid::regular(kPhases), kPerPhase, seed);
}

ChiTable table_for(double w) { return build_chi_table(build_filter_profile(w)); }

const PointEstimate& grid_min(const QuasiprobGrid& g) {
  const PointEstimate* best = &g.points.front();
  for (const auto& p : g.points)
    if (p.value < best->value) best = &p;
  return *best;
}

// First half of every phase block (the sample layout is phase-major).
QuadratureDataset first_half(const QuadratureDataset& ds) {
  QuadratureDataset out;
  out.grid = ds.grid;
  out.state = ds.state;
  out.seed = ds.seed;
  out.source = ds.source;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < ds.grid.size(); ++k) {
    const std::size_t n_k = static_cast<std::size_t>(ds.per_phase_counts[k]);
    for (std::size_t i = 0; i < n_k / 2; ++i) {
      out.phase_index.push_back(ds.phase_index[pos + i]);
      out.x.push_back(ds.x[pos + i]);
    }
    pos += n_k;
  }
  out.finalize();
  return out;
}

int criterion1() {
  Criterion c(1, "headline negativity on the Im axis");
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = dataset_for(kSqueezed, 1);
  const auto table = table_for(kWidth);
  const auto grid =
      estimate_grid(ds, table, GridSpec::axis_im(-3.0, 3.0, 0.05), kDitherSeed);
  const PointEstimate& m = grid_min(grid);
  const double r = std::abs(m.alpha);

  c.check(r >= 0.8 && r <= 1.0,
          str("minimum at alpha = %.6gi, |alpha_min| = %.4f within [0.80, 1.00]",
              m.alpha.imag(), r));
  c.check(m.value >= -0.075 && m.value <= -0.045,
          str("minimum value %.6f within [-0.075, -0.045]", m.value));

  const OracleEvaluator ev(kSqueezed, kWidth);
  const double oracle = ev.value(m.alpha);
  const double band = 3.0 * std::sqrt(m.std_err * m.std_err + 1e-7 * 1e-7);
  c.check(std::abs(m.value - oracle) <= band,
          str("oracle agreement: |%.6f - (%.6f)| = %.3e <= %.3e (3 combined std errs)",
              m.value, oracle, std::abs(m.value - oracle), band));

  const double wall = seconds_since(t0);
  c.check(wall < 300.0, str("121-point axis runtime %.1f s under 300 s", wall));
  return c.finish();
}

int criterion2() {
  Criterion c(2, "significance over five seeds");
  const auto table = table_for(kWidth);
  EstimateOptions opts;
  opts.fast_chi = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ds = dataset_for(kSqueezed, seed);
    const auto grid =
        estimate_grid(ds, table, GridSpec::axis_im(-3.0, 3.0, 0.05), kDitherSeed, opts);
    const Significance sig = significance(grid);
    const double se = grid.points[sig.index].std_err;
    c.check(sig.sigma <= -30.0, str("seed %llu: Sigma = %.2f <= -30",
                                    static_cast<unsigned long long>(seed), sig.sigma));
    c.check(se <= 1.5e-3,
            str("seed %llu: std_err at the minimum %.3e <= 1.5e-3",
                static_cast<unsigned long long>(seed), se));
  }
  return c.finish();
}

int criterion3() {
  Criterion c(3, "width-scan optimum");
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = dataset_for(kSqueezed, 1);
  std::vector<double> widths;
  for (int i = 0; i <= 13; ++i) widths.push_back(0.7 + 0.1 * i);
  EstimateOptions opts;
  opts.fast_chi = true;
  const auto scan =
      scan_width(ds, widths, GridSpec::axis_im(-3.0, 3.0, 0.05), kDitherSeed, opts);

  bool all_ok = true;
  for (const auto& e : scan.entries) all_ok = all_ok && e.ok;
  c.check(all_ok, str("all %zu widths evaluated without kernel failures",
                      scan.entries.size()));

  const auto& best = scan.entries[scan.optimum];
  c.check(best.width >= 1.0 && best.width <= 1.6,
          str("argmax |Sigma| at w = %.2f within [1.0, 1.6] (Sigma = %.2f)", best.width,
              best.sigma));
  c.check(scan.optimum > 0 && scan.optimum + 1 < scan.entries.size() &&
              best.sigma < scan.entries.front().sigma &&
              best.sigma < scan.entries.back().sigma,
          str("interior maximum: Sigma(%.2f) = %.2f vs Sigma(%.2f) = %.2f and "
              "Sigma(%.2f) = %.2f",
              best.width, best.sigma, scan.entries.front().width,
              scan.entries.front().sigma, scan.entries.back().width,
              scan.entries.back().sigma));

  const double wall = seconds_since(t0);
  c.check(wall < 1800.0, str("14-width scan runtime %.1f s under 1800 s", wall));
  return c.finish();
}

int criterion4() {
  Criterion c(4, "kernel reconstruction accuracy and filter endpoints");
  const auto profile = build_filter_profile(kWidth);
  const auto table = build_chi_table(profile);

  auto direct = [&](double xi) {
    auto f = [&](double b) {
      return b * std::cos(b * xi) * std::exp(0.5 * b * b) * filter_value(profile, b);
    };
    return 2.0 / kPi *
           boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
               f, 0.0, profile.b_cut, 12, 1e-12);
  };
  double sup = 0.0, at = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double xi = 40.0 * uniform01(424242, 0, static_cast<std::uint64_t>(i)) - 20.0;
    const double d = std::abs(chi(table, xi) - direct(xi));
    if (d > sup) {
      sup = d;
      at = xi;
    }
  }
  c.check(sup <= 3.5e-5,
          str("sup |sinc series - adaptive quadrature| = %.3e <= 3.5e-5 over 1000 "
              "xi in [-20, 20] (worst at xi = %.3f, %zu coefficients)",
              sup, at, table.n_coeff()));
  c.check(filter_value(profile, 0.0) == 1.0, "Omega_w(0) == 1 exactly");
  const double tail = filter_value(profile, profile.b_cut);
  c.check(tail > 0.0 && tail < 1e-15,
          str("Omega_w(4w) = %.3e in (0, 1e-15)", tail));
  return c.finish();
}

int criterion5() {
  Criterion c(5, "discrete-phase systematics and Riemann-sum control");
  const OracleEvaluator ev(kSqueezed, kWidth);
  const GridSpec axis = GridSpec::axis_im(-3.0, 3.0, 0.05);
  double worst = 0.0, at = 0.0;
  for (const auto& a : axis.points()) {
    const double err = std::abs(ev.value(a) - ev.discrete_phase(a, kPhases));
    if (err > worst) {
      worst = err;
      at = a.imag();
    }
  }
  c.check(worst < 3.6e-4,
          str("max |continuous - 21-phase| = %.3e < 3.6e-4 over the 121-point axis "
              "(worst at alpha = %.2fi)",
              worst, at));

  const OracleEvaluator vac(kVacuum, kWidth);
  const std::complex<double> far{0.0, 10.0};
  const double riem = vac.riemann(far, kPhases);
  const double cont = vac.value(far);
  c.check(std::abs(riem) > 10.0 * std::abs(cont),
          str("Riemann sum does not decay at |alpha| = 10: |%.4e| > 10 x |%.1e|", riem,
              cont));

  const int n_sweep = 512;
  std::vector<double> g(n_sweep);
  for (int i = 0; i < n_sweep; ++i) {
    const double theta = kPi * i / n_sweep;
    g[i] = vac.riemann({10.0 * std::cos(theta), 10.0 * std::sin(theta)}, kPhases);
  }
  int maxima = 0;
  for (int i = 0; i < n_sweep; ++i) {
    const double prev = g[(i + n_sweep - 1) % n_sweep];
    const double next = g[(i + 1) % n_sweep];
    if (g[i] > prev && g[i] > next) ++maxima;
  }
  c.check(maxima == 21,
          str("phase sweep of the Riemann sum shows %d oscillation maxima (expect 21)",
              maxima));
  return c.finish();
}

int criterion6() {
  Criterion c(6, "classicality controls");
  const std::vector<double> widths = {0.7, 1.3, 2.0};
  std::vector<ChiTable> tables;
  for (double w : widths) tables.push_back(table_for(w));
  const GridSpec axis = GridSpec::axis_im(-2.0, 2.0, 0.1);
  EstimateOptions opts;
  opts.fast_chi = true;

  struct Control {
    const char* name;
    GaussianStateSpec state;
    std::uint64_t seed;
  };
  const Control controls[] = {{"vacuum", kVacuum, 11}, {"thermal V=2", kThermal, 12}};
  for (const auto& ctl : controls) {
    const auto ds = dataset_for(ctl.state, ctl.seed);
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const auto grid = estimate_grid(ds, tables[i], axis, kDitherSeed, opts);
      double worst_margin = std::numeric_limits<double>::infinity();
      for (const auto& p : grid.points)
        worst_margin = std::min(worst_margin, p.value + 3.0 * p.std_err);
      c.check(worst_margin >= 0.0,
              str("%s, w = %.1f: no grid point below -3 std_err (worst margin %+.2e)",
                  ctl.name, widths[i], worst_margin));
    }
  }

  double omin = std::numeric_limits<double>::infinity();
  for (double w : widths) {
    const OracleEvaluator vac(kVacuum, w);
    for (const auto& a : axis.points()) omin = std::min(omin, vac.value(a));
  }
  const OracleEvaluator th(kThermal, kWidth);
  for (const auto& a : axis.points()) omin = std::min(omin, th.value(a));
  c.check(omin >= -1e-9,
          str("classical oracle lower bound %+.2e >= -1e-9 "
              "(vacuum at w in {0.7, 1.3, 2.0}; thermal at w = 1.3)",
              omin));
  return c.finish();
}

int criterion7() {
  Criterion c(7, "normalization, symmetry, scaling, determinism");
  const double norm = normalization_check(kSqueezed, kWidth, 8.0);
  c.check(std::abs(norm - 1.0) <= 1e-2,
          str("squeezed disc integral over R = 8: %.7f within 1e-2 of 1", norm));

  const OracleEvaluator ev(kSqueezed, kWidth);
  double sym = 0.0;
  for (std::complex<double> a :
       {std::complex<double>{0.3, 0.7}, {1.1, -0.4}, {0.0, 0.9}})
    sym = std::max(sym, std::abs(ev.value(a) - ev.value(-a)));
  c.check(sym <= 1e-10, str("max |P(alpha) - P(-alpha)| = %.2e <= 1e-10", sym));

  const auto table = table_for(kWidth);
  double even = 0.0;
  for (double xi : {0.3, 1.7, 5.5, 12.2})
    even = std::max(even, std::abs(chi(table, xi) - chi(table, -xi)));
  c.check(even <= 1e-12, str("max |chi(xi) - chi(-xi)| = %.2e <= 1e-12", even));

  const auto ds = dataset_for(kSqueezed, 1);
  const auto half = first_half(ds);
  const auto pe_full = estimate_point(ds, table, {0.0, 0.9}, kDitherSeed);
  const auto pe_half = estimate_point(half, table, {0.0, 0.9}, kDitherSeed);
  const double ratio = pe_half.std_err / pe_full.std_err / std::sqrt(2.0);
  c.check(std::abs(ratio - 1.0) <= 0.1,
          str("std_err half/full dataset = %.4f x sqrt(2), within 10%%", ratio));

  const GridSpec small = GridSpec::axis_im(-1.0, 1.0, 0.5);
  EstimateOptions t1, t4;
  t1.threads = 1;
  t4.threads = 4;
  const std::string a = grid_csv_string(estimate_grid(ds, table, small, kDitherSeed, t1));
  const std::string b = grid_csv_string(estimate_grid(ds, table, small, kDitherSeed, t4));
  const std::string b2 =
      grid_csv_string(estimate_grid(ds, table, small, kDitherSeed, t4));
  c.check(a == b && b == b2, "byte-identical grid CSV across threads {1, 4} and rerun");
  return c.finish();
}

int run_criterion(int n) {
  try {
    switch (n) {
      case 1: return criterion1();
      case 2: return criterion2();
      case 3: return criterion3();
      case 4: return criterion4();
      case 5: return criterion5();
      case 6: return criterion6();
      case 7: return criterion7();
      default:
        std::fprintf(stderr, "unknown criterion %d (valid: 1..7)\n", n);
        return 1;
    }
  } catch (const std::exception& e) {
    std::printf("[FAIL] criterion %d: unhandled error: %s\n", n, e.what());
    std::fflush(stdout);
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    only = std::atoi(argv[2]);
    if (only < 1 || only > 7) {
      std::fprintf(stderr, "usage: acceptance [--criterion N]  (N in 1..7)\n");
      return 2;
    }
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: acceptance [--criterion N]  (N in 1..7)\n");
    return 2;
  }

  int fails = 0;
  if (only != 0) {
    fails = run_criterion(only);
  } else {
    for (int n = 1; n <= 7; ++n) fails += run_criterion(n);
    std::printf("acceptance: %d failed clause%s\n", fails, fails == 1 ? "" : "s");
  }
  return std::min(fails, 127);
}
