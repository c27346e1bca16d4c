#include "nqp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nqp/io.hpp"
#include "nqp/quad.hpp"

namespace nqp {

double omega_base(double r) { return std::exp(-(r * r) * (r * r)); }

namespace {

// Unnormalized autocorrelation A(r) = \int d2b' omega(|b'|) omega(|b'+r|) in
// polar coordinates: radius rho in [0, 3] (omega(3) ~ 6.6e-36), angle folded
// onto [0, pi] and doubled.  Gauss-Legendre panels; the integrand is smooth,
// so the rule converges spectrally.
struct AutocorrRule {
  PanelRule rho;                 // nodes/weights on [0, 3]
  std::vector<double> g;         // rho * omega(rho) * w_rho
  PanelRule theta;               // nodes/weights on [0, pi]
  std::vector<double> cos_theta;
};

AutocorrRule make_rule(int rho_panels, int theta_panels, int per_panel) {
  AutocorrRule r;
  r.rho = gl_panels(0.0, 3.0, rho_panels, per_panel);
  r.g.resize(r.rho.x.size());
  for (std::size_t i = 0; i < r.rho.x.size(); ++i)
    r.g[i] = r.rho.x[i] * omega_base(r.rho.x[i]) * r.rho.w[i];
  r.theta = gl_panels(0.0, std::numbers::pi, theta_panels, per_panel);
  r.cos_theta.resize(r.theta.x.size());
  for (std::size_t i = 0; i < r.theta.x.size(); ++i)
    r.cos_theta[i] = std::cos(r.theta.x[i]);
  return r;
}

double autocorr(const AutocorrRule& rule, double r) {
  const double r2 = r * r;
  double total = 0.0;
  for (std::size_t m = 0; m < rule.theta.x.size(); ++m) {
    const double c = 2.0 * r * rule.cos_theta[m];
    double inner = 0.0;
    for (std::size_t i = 0; i < rule.rho.x.size(); ++i) {
      const double rho = rule.rho.x[i];
      const double t = rho * rho + r2 + c * rho;
      inner += rule.g[i] * std::exp(-t * t);
    }
    total += 2.0 * rule.theta.w[m] * inner;
  }
  return total;
}

struct BaseTable {
  std::vector<double> values;  // Omega_1 at r_j = 4 j/(n-1)
  double normalization = 0.0;  // A(0)
  double quad_error = 0.0;
};

// Omega_1 is width-independent: profiles at any w share the same table on the
// scaled radii, so it is computed once per node count and cached.
const BaseTable& omega1_base(std::size_t n_nodes) {
  static std::map<std::size_t, BaseTable> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n_nodes);
  if (it != cache.end()) return it->second;

  const AutocorrRule rule = make_rule(10, 8, 16);
  BaseTable t;
  t.normalization = autocorr(rule, 0.0);
  t.values.resize(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    const double r = 4.0 * static_cast<double>(j) / static_cast<double>(n_nodes - 1);
    t.values[j] = autocorr(rule, r) / t.normalization;
  }
  // Error estimate: halved panel counts on a spread of nodes.
  const AutocorrRule coarse = make_rule(5, 4, 16);
  const double norm_c = autocorr(coarse, 0.0);
  double err = std::abs(t.normalization - norm_c) / t.normalization;
  const std::size_t stride = std::max<std::size_t>(1, n_nodes / 16);
  for (std::size_t j = 0; j < n_nodes; j += stride) {
    const double r = 4.0 * static_cast<double>(j) / static_cast<double>(n_nodes - 1);
    err = std::max(err, std::abs(autocorr(coarse, r) / norm_c - t.values[j]));
  }
  t.quad_error = err;
  if (err > 1e-12)
    throw NumericGateError("filter autocorrelation quadrature did not converge: "
                           "estimated error " + fmt17(err) + " > 1e-12");
  return cache.emplace(n_nodes, std::move(t)).first->second;
}

}  // namespace

FilterProfile build_filter_profile(double width, std::size_t n_nodes) {
  if (!(width > 0.0)) throw std::invalid_argument("build_filter_profile: width must be > 0");
  if (n_nodes < 64) throw std::invalid_argument("build_filter_profile: need >= 64 nodes");

  const BaseTable& base = omega1_base(n_nodes);
  FilterProfile p;
  p.width = width;
  p.b_cut = 4.0 * width;
  p.normalization = base.normalization;
  p.quad_error = base.quad_error;
  p.values = base.values;  // Omega_w(b_j) = Omega_1(b_j / w) = Omega_1(4j/(n-1))
  p.nodes.resize(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j)
    p.nodes[j] = p.b_cut * static_cast<double>(j) / static_cast<double>(n_nodes - 1);

  // Table sanity: Omega(0)=1, positive, non-increasing, negligible at the cut.
  if (std::abs(p.values.front() - 1.0) > 1e-12)
    throw NumericGateError("filter profile: Omega(0) deviates from 1");
  for (std::size_t j = 0; j < n_nodes; ++j) {
    if (!(p.values[j] > 0.0))
      throw NumericGateError("filter profile: non-positive value at node");
    if (j > 0 && p.values[j] > p.values[j - 1] * (1.0 + 1e-12) + 1e-16)
      throw NumericGateError("filter profile: table is not non-increasing");
  }
  if (!(p.values.back() <= 1e-15))
    throw NumericGateError("filter profile: value at b_cut exceeds 1e-15");
  return p;
}

double filter_value(const FilterProfile& p, double b) {
  const double ab = std::abs(b);
  if (ab > p.b_cut) return 0.0;
  const std::size_t n = p.nodes.size();
  const double h = p.b_cut / static_cast<double>(n - 1);
  auto i = static_cast<std::ptrdiff_t>(ab / h);
  // 4-point Lagrange stencil, clamped at the ends; reproduces nodes exactly.
  std::ptrdiff_t i0 = std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
  double acc = 0.0;
  for (std::ptrdiff_t m = 0; m < 4; ++m) {
    double basis = 1.0;
    for (std::ptrdiff_t j = 0; j < 4; ++j) {
      if (j == m) continue;
      basis *= (ab - p.nodes[i0 + j]) / (p.nodes[i0 + m] - p.nodes[i0 + j]);
    }
    acc += basis * p.values[i0 + m];
  }
  return acc;
}

void dump_filter_csv(const FilterProfile& p, std::ostream& os) {
  os << "b,omega\n";
  for (std::size_t j = 0; j < p.nodes.size(); ++j)
    os << fmt17(p.nodes[j]) << ',' << fmt17(p.values[j]) << '\n';
}

}  // namespace nqp
