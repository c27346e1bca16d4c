#include "nqp/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nqp/io.hpp"
#include "nqp/quad.hpp"
#include "nqp/rng.hpp"

namespace nqp {

namespace {

constexpr double kPi = std::numbers::pi;

// Quadrature rule for the defining integral, sized so the fastest oscillation
// cos(b * xi) present is resolved with >= 8 nodes per period.
PanelRule chi_rule(double b_cut, double xi_abs_max, bool two_sided) {
  const double periods = b_cut * xi_abs_max / (2.0 * kPi);
  const int panels = std::max(16, static_cast<int>(std::ceil(periods / 2.0)) + 8);
  return two_sided ? gl_panels(-b_cut, b_cut, 2 * panels, 16)
                   : gl_panels(0.0, b_cut, panels, 16);
}

}  // namespace

double chi_direct(const FilterProfile& profile, double xi) {
  const double axi = std::abs(xi);
  const PanelRule rule = chi_rule(profile.b_cut, axi, false);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double b = rule.x[i];
    acc += rule.w[i] * b * std::cos(b * axi) * std::exp(0.5 * b * b) *
           filter_value(profile, b);
  }
  return 2.0 * acc / kPi;
}

namespace {

ChiTable build_once(const FilterProfile& profile, std::size_t n_coeff) {
  ChiTable t;
  t.width = profile.width;
  t.b_cut = profile.b_cut;
  t.coeffs.resize(n_coeff);

  // Two-sided complex quadrature of \int |b|/pi e^{i b xi} e^{b^2/2} Omega_w(b) db.
  // The imaginary part is odd in b and must cancel; assert that before discarding.
  const double xi_node_max = kPi * static_cast<double>(n_coeff - 1) / t.b_cut;
  const PanelRule rule = chi_rule(t.b_cut, xi_node_max, true);
  std::vector<double> g(rule.x.size());
  double g_mass = 0.0;  // cancellation scale for the imaginary-residue gate
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double b = rule.x[i];
    g[i] = rule.w[i] * std::abs(b) / kPi * std::exp(0.5 * b * b) *
           filter_value(profile, b);
    g_mass += std::abs(g[i]);
  }
  const double im_gate = std::max(1e-12, 1e-12 * g_mass);
  for (std::size_t j = 0; j < n_coeff; ++j) {
    const double xi = kPi * static_cast<double>(j) / t.b_cut;
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      re += g[i] * std::cos(rule.x[i] * xi);
      im += g[i] * std::sin(rule.x[i] * xi);
    }
    if (!(std::abs(im) <= im_gate))
      throw NumericGateError("chi table: imaginary residue " + fmt17(im) +
                             " at node " + std::to_string(j));
    t.coeffs[j] = re;
  }

  t.signed_coeffs.resize(n_coeff);
  t.pi2j2.resize(n_coeff);
  for (std::size_t j = 0; j < n_coeff; ++j) {
    t.signed_coeffs[j] = (j & 1) ? -t.coeffs[j] : t.coeffs[j];
    t.pi2j2[j] = (kPi * j) * (kPi * j);
  }

  // Measured sup-norm reconstruction error on a dense grid offset from the
  // sinc nodes, against direct quadrature.
  double err = 0.0;
  for (int m = 0; m < 211; ++m) {
    const double xi = 20.0 * (m + 0.381966) / 211.0;
    err = std::max(err, std::abs(chi(t, xi) - chi_direct(profile, xi)));
  }
  t.accuracy = err;
  return t;
}

}  // namespace

namespace {

// Empty string when the table passes both gates, else the reason.
std::string gate_failure(const ChiTable& t) {
  if (t.accuracy > 3.5e-5)
    return "chi table accuracy gate failed: " + fmt17(t.accuracy) + " > 3.5e-5 with " +
           std::to_string(t.n_coeff()) + " coefficients";
  double cmax = 0.0;
  for (double c : t.coeffs) cmax = std::max(cmax, std::abs(c));
  if (!(std::abs(t.coeffs.back()) < 1e-5 * cmax))
    return "chi table tail coefficient " + fmt17(t.coeffs.back()) +
           " is not negligible against max " + fmt17(cmax) + " with " +
           std::to_string(t.n_coeff()) + " coefficients";
  return {};
}

}  // namespace

ChiTable build_chi_table(const FilterProfile& profile, std::size_t n_coeff) {
  if (n_coeff < 16) throw std::invalid_argument("build_chi_table: too few coefficients");
  if (std::abs(profile.b_cut - 4.0 * profile.width) > 1e-12 * profile.b_cut)
    throw std::invalid_argument("build_chi_table: profile must have b_cut = 4w");

  ChiTable t = build_once(profile, n_coeff);
  std::string failure = gate_failure(t);
  if (!failure.empty() && n_coeff < 512) {
    t = build_once(profile, 512);
    failure = gate_failure(t);
  }
  if (!failure.empty()) throw NumericGateError(failure);
  return t;
}

double chi(const ChiTable& T, double xi) {
  const double z = T.b_cut * std::abs(xi);
  const auto n = static_cast<std::ptrdiff_t>(T.coeffs.size());
  // Nearest sinc node and the offset t = z - pi*js.  sin(z) = (-1)^js sin(t),
  // and evaluating every term through t keeps numerator and denominator
  // consistent, so node hits reproduce the coefficients exactly.
  const double jd = std::nearbyint(z / kPi);
  const auto js = static_cast<std::ptrdiff_t>(jd);
  const double t = z - jd * kPi;
  const double st = std::sin(t);
  const double sz = (js & 1) ? -st : st;
  const double z2 = z * z;
  const double* sc = T.signed_coeffs.data();
  const double* p2 = T.pi2j2.data();

  // Pairs j >= 1, j != js:
  //   c_j [sinc(z - pi j) + sinc(z + pi j)] = (-1)^j c_j 2 z sin(z)/(z^2 - pi^2 j^2).
  // Four fixed accumulation lanes (deterministic order, division-throughput bound).
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  auto run = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
    std::ptrdiff_t j = lo;
    for (; j + 4 <= hi; j += 4) {
      a0 += sc[j] / (z2 - p2[j]);
      a1 += sc[j + 1] / (z2 - p2[j + 1]);
      a2 += sc[j + 2] / (z2 - p2[j + 2]);
      a3 += sc[j + 3] / (z2 - p2[j + 3]);
    }
    for (; j < hi; ++j) a0 += sc[j] / (z2 - p2[j]);
  };
  if (js >= 1) run(1, std::min(js, n));
  if (js + 1 < n) run(js + 1, n);
  double res = ((a0 + a1) + (a2 + a3)) * (2.0 * z * sz);

  if (js == 0) {
    res += T.coeffs[0] * (z == 0.0 ? 1.0 : st / z);  // t == z on this branch
  } else {
    res += T.coeffs[0] * (sz / z);
    if (js < n)
      res += T.coeffs[js] * ((t == 0.0 ? 1.0 : st / t) + st / (z + jd * kPi));
  }
  return res;
}

double pattern_value(const ChiTable& table, double x, double phi,
                     std::complex<double> alpha) {
  const double a = std::abs(alpha);
  if (a == 0.0) return chi(table, x);
  const double th = std::arg(alpha);
  return chi(table, x + 2.0 * a * std::sin(th - phi - kPi / 2.0));
}

double dither_offset(std::uint64_t dither_seed, std::size_t phase_k,
                     std::uint64_t sample_i, std::size_t n_phases) {
  if (n_phases == 0) throw std::invalid_argument("dither_offset: n_phases must be >= 1");
  // Dedicated stream block (phase | 1<<32) so a shared seed cannot collide
  // with the simulator's per-phase streams.
  const double u = uniform01(dither_seed, (1ull << 32) + phase_k, sample_i);
  return (2.0 * u - 1.0) * kPi / (2.0 * static_cast<double>(n_phases));
}

double dither_phase(double phi_k, std::size_t n_phases, std::uint64_t dither_seed,
                    std::size_t phase_k, std::uint64_t sample_i) {
  return phi_k + dither_offset(dither_seed, phase_k, sample_i, n_phases);
}

double modified_pattern_value(const ChiTable& table, double x, double phi_k,
                              std::complex<double> alpha, std::size_t n_phases) {
  if (n_phases == 0)
    throw std::invalid_argument("modified_pattern_value: n_phases must be >= 1");
  const double a = std::abs(alpha);
  const double h = kPi / (2.0 * static_cast<double>(n_phases));
  // Cell average; panel count resolves the fastest oscillation of the kernel
  // argument, which sweeps at rate <= 2|alpha| b_cut over the cell.
  const int panels = std::max(
      2, static_cast<int>(std::ceil(a * table.b_cut / (2.0 * n_phases))) + 1);
  const PanelRule rule = gl_panels(-h, h, panels, 16);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i)
    acc += rule.w[i] * pattern_value(table, x, phi_k + rule.x[i], alpha);
  return acc * static_cast<double>(n_phases) / kPi;
}

ChiDense build_chi_dense(const ChiTable& table, double xi_max) {
  if (!(xi_max > 0.0)) throw std::invalid_argument("build_chi_dense: xi_max must be > 0");
  ChiDense d;
  d.b_cut = table.b_cut;
  double step = kPi / (8.0 * table.b_cut);
  for (int attempt = 0; attempt < 6; ++attempt, step *= 0.5) {
    const auto n = static_cast<std::size_t>(std::ceil(xi_max / step)) + 8;
    d.step = step;
    d.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.values[i] = chi(table, i * step);
    d.xi_max = (n - 4) * step;
    // Validate the cubic interpolant between grid points against the sinc sum.
    double err = 0.0;
    const std::size_t probes = std::min<std::size_t>(1024, n - 4);
    for (std::size_t m = 0; m < probes; ++m) {
      const double frac = static_cast<double>(m) / probes;
      const double xi = (frac * (n - 5) + 0.381966) * step;
      err = std::max(err, std::abs(chi_dense(d, table, xi) - chi(table, xi)));
    }
    d.max_err = err;
    if (err <= 1e-6) return d;
  }
  throw NumericGateError("chi dense lookup failed validation: error " +
                         fmt17(d.max_err) + " > 1e-6");
}

double chi_dense(const ChiDense& d, const ChiTable& table, double xi) {
  const double axi = std::abs(xi);
  if (axi >= d.xi_max) return chi(table, xi);  // rare stragglers: reference path
  const double u = axi / d.step;
  const auto n = static_cast<std::ptrdiff_t>(d.values.size());
  auto i0 = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(u) - 1, 0, n - 4);
  const double s = u - static_cast<double>(i0);
  const double s1 = s - 1.0, s2 = s - 2.0, s3 = s - 3.0;
  const double w0 = -s1 * s2 * s3 / 6.0;
  const double w1 = s * s2 * s3 / 2.0;
  const double w2 = -s * s1 * s3 / 2.0;
  const double w3 = s * s1 * s2 / 6.0;
  const double* v = d.values.data() + i0;
  return w0 * v[0] + w1 * v[1] + w2 * v[2] + w3 * v[3];
}

void dump_chi_csv(const ChiTable& table, std::ostream& os, double xi_max,
                  double xi_step) {
  os << "xi,chi\n";
  for (double xi = 0.0; xi <= xi_max + 1e-12; xi += xi_step)
    os << fmt17(xi) << ',' << fmt17(chi(table, xi)) << '\n';
}

}  // namespace nqp
