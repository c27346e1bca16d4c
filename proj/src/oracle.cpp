#include "nqp/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "nqp/io.hpp"
#include "nqp/quad.hpp"

namespace nqp {

namespace {

constexpr double kPi = std::numbers::pi;

// Node counts that resolve the oscillation e^{2i|alpha| b ...}: the angular
// integrand has <= 2|alpha|b_max/(2pi) periods over [0, pi), the radial one
// |alpha|b_max/pi periods over [0, b_max].
std::size_t required_angular(double a_bmax) {
  return static_cast<std::size_t>(std::ceil(64.0 * (1.0 + a_bmax)));
}
std::size_t required_radial(double a_bmax) {
  return 16 + static_cast<std::size_t>(std::ceil(4.0 * a_bmax));
}

}  // namespace

double gaussian_characteristic(const GaussianStateSpec& state, double b, double phi) {
  const double v = quadrature_variance(state, phi - kPi / 2.0);
  return std::exp(0.5 * b * b * (1.0 - v));
}

OracleEvaluator::OracleEvaluator(const GaussianStateSpec& state, double width,
                                 OracleConfig cfg)
    : state_(state), cfg_(cfg), profile_(build_filter_profile(width)) {
  if (!(cfg_.tolerance > 0.0))
    throw std::invalid_argument("oracle: tolerance must be > 0");
  if (cfg_.b_max < 0.0) throw std::invalid_argument("oracle: b_max must be >= 0");
  if (cfg_.b_max == 0.0) cfg_.b_max = profile_.b_cut;
}

namespace {

PanelRule radial_rule(const OracleConfig& cfg, double a) {
  const double a_bmax = a * cfg.b_max;
  const std::size_t required = required_radial(a_bmax);
  const std::size_t nodes =
      cfg.radial_nodes ? cfg.radial_nodes : std::max<std::size_t>(128, 2 * required);
  if (nodes < required)
    throw NumericGateError(
        "oracle: radial grid cannot resolve |alpha| b_max = " + fmt17(a_bmax) +
        "; need >= " + std::to_string(required) + " nodes, configured " +
        std::to_string(nodes));
  return gl_panels(0.0, cfg.b_max, (nodes + 15) / 16, 16);
}

std::size_t angular_count(const OracleConfig& cfg, double a) {
  const double a_bmax = a * cfg.b_max;
  const std::size_t required = required_angular(a_bmax);
  const std::size_t nodes = cfg.angular_nodes ? cfg.angular_nodes : required;
  if (nodes < required)
    throw NumericGateError(
        "oracle: angular grid cannot resolve |alpha| b_max = " + fmt17(a_bmax) +
        "; need >= " + std::to_string(required) + " nodes over [0, pi), configured " +
        std::to_string(nodes));
  return nodes;
}

}  // namespace

double OracleEvaluator::value(std::complex<double> alpha) const {
  const double a = std::abs(alpha);
  const double theta = (a == 0.0) ? 0.0 : std::arg(alpha);
  const PanelRule rule = radial_rule(cfg_, a);
  const std::size_t nb = rule.x.size();
  std::vector<double> g(nb), hb2(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const double b = rule.x[i];
    g[i] = rule.w[i] * b * filter_value(profile_, b);
    hb2[i] = 0.5 * b * b;
  }

  // Full-circle rectangle rule (periodic integrand -> spectral accuracy); the
  // imaginary part cancels by the beta -> -beta symmetry and is asserted away.
  const std::size_t m_half = angular_count(cfg_, a);
  const std::size_t m_full = 2 * m_half;
  const double dphi = 2.0 * kPi / static_cast<double>(m_full);
  double re = 0.0, im = 0.0;
  for (std::size_t m = 0; m < m_full; ++m) {
    const double phi = static_cast<double>(m) * dphi;
    const double one_minus_v = 1.0 - quadrature_variance(state_, phi - kPi / 2.0);
    const double s = 2.0 * a * std::sin(theta - phi);
    double row_re = 0.0, row_im = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      const double f = g[i] * std::exp(hb2[i] * one_minus_v);
      row_re += f * std::cos(s * rule.x[i]);
      row_im += f * std::sin(s * rule.x[i]);
    }
    re += row_re;
    im += row_im;
  }
  re *= dphi / (kPi * kPi);
  im *= dphi / (kPi * kPi);
  if (!(std::abs(im) <= cfg_.tolerance))
    throw NumericGateError("oracle: imaginary residue " + fmt17(im) +
                           " exceeds tolerance " + fmt17(cfg_.tolerance));
  return re;
}

namespace {

// Radial reduction K_V(s) = (2/pi) Int_0^bmax b e^{b^2(1-V)/2} Omega(b) cos(b s) db,
// the expectation of the kernel under exact Gaussian quadrature statistics.
struct RadialKernel {
  std::vector<double> b;
  std::vector<double> g;    // (2/pi) W b Omega
  std::vector<double> hb2;  // b^2/2

  RadialKernel(const OracleConfig& cfg, const FilterProfile& profile, double a) {
    const PanelRule rule = radial_rule(cfg, a);
    const std::size_t n = rule.x.size();
    b = rule.x;
    g.resize(n);
    hb2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = 2.0 / kPi * rule.w[i] * b[i] * filter_value(profile, b[i]);
      hb2[i] = 0.5 * b[i] * b[i];
    }
  }

  // Weights with the variance factor folded in, fixed per phase.
  std::vector<double> weights_for(double v) const {
    std::vector<double> e(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) e[i] = g[i] * std::exp(hb2[i] * (1.0 - v));
    return e;
  }

  double eval(const std::vector<double>& e, double s) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) acc += e[i] * std::cos(b[i] * s);
    return acc;
  }
};

}  // namespace

double OracleEvaluator::discrete_phase(std::complex<double> alpha, std::size_t n_phases,
                                       double phase_offset) const {
  if (n_phases == 0) throw std::invalid_argument("oracle: n_phases must be >= 1");
  const double a = std::abs(alpha);
  const double theta = (a == 0.0) ? 0.0 : std::arg(alpha);
  const RadialKernel kernel(cfg_, profile_, a);

  const double h = kPi / (2.0 * static_cast<double>(n_phases));
  const int panels = std::max(
      2, static_cast<int>(std::ceil(a * cfg_.b_max / (2.0 * n_phases))) + 1);
  const PanelRule cell = gl_panels(-h, h, panels, 16);

  double acc = 0.0;
  for (std::size_t k = 0; k < n_phases; ++k) {
    const double phi_k = phase_offset + kPi * static_cast<double>(k) / n_phases;
    const std::vector<double> e = kernel.weights_for(quadrature_variance(state_, phi_k));
    double cell_sum = 0.0;
    for (std::size_t m = 0; m < cell.x.size(); ++m) {
      const double s = 2.0 * a * std::sin(theta - (phi_k + cell.x[m]) - kPi / 2.0);
      cell_sum += cell.w[m] * kernel.eval(e, s);
    }
    acc += cell_sum;
  }
  return acc / kPi;
}

double OracleEvaluator::riemann(std::complex<double> alpha, std::size_t n_phases,
                                double phase_offset) const {
  if (n_phases == 0) throw std::invalid_argument("oracle: n_phases must be >= 1");
  const double a = std::abs(alpha);
  const double theta = (a == 0.0) ? 0.0 : std::arg(alpha);
  const RadialKernel kernel(cfg_, profile_, a);

  double acc = 0.0;
  for (std::size_t k = 0; k < n_phases; ++k) {
    const double phi_k = phase_offset + kPi * static_cast<double>(k) / n_phases;
    const std::vector<double> e = kernel.weights_for(quadrature_variance(state_, phi_k));
    const double s = 2.0 * a * std::sin(theta - phi_k - kPi / 2.0);
    acc += kernel.eval(e, s);
  }
  return acc / static_cast<double>(n_phases);
}

double oracle_quasiprob(const GaussianStateSpec& state, std::complex<double> alpha,
                        double width, const OracleConfig& cfg) {
  return OracleEvaluator(state, width, cfg).value(alpha);
}

double oracle_discrete_phase(const GaussianStateSpec& state, std::complex<double> alpha,
                             double width, std::size_t n_phases,
                             const OracleConfig& cfg) {
  return OracleEvaluator(state, width, cfg).discrete_phase(alpha, n_phases);
}

double systematic_error(const GaussianStateSpec& state, std::complex<double> alpha,
                        double width, std::size_t n_phases, const OracleConfig& cfg) {
  const OracleEvaluator ev(state, width, cfg);
  return std::abs(ev.value(alpha) - ev.discrete_phase(alpha, n_phases));
}

double riemann_sum_quasiprob(const GaussianStateSpec& state, std::complex<double> alpha,
                             double width, std::size_t n_phases,
                             const OracleConfig& cfg) {
  return OracleEvaluator(state, width, cfg).riemann(alpha, n_phases);
}

double wigner_squeezed(const GaussianStateSpec& state, double x, double p) {
  return std::exp(-0.5 * x * x / state.v_x - 0.5 * p * p / state.v_p) /
         (2.0 * kPi * std::sqrt(state.v_x * state.v_p));
}

double normalization_check(const GaussianStateSpec& state, double width, double radius,
                           const OracleConfig& cfg) {
  if (!(radius > 0.0)) throw std::invalid_argument("normalization_check: radius must be > 0");
  const OracleEvaluator ev(state, width, cfg);
  const OracleConfig& c = ev.config();

  // The angular alpha-integral reduces exactly to 2 pi J0(2 a b); what is left
  // is a smooth radial double integral:
  //   disc(R) = 4 Int_0^R a [ Int_0^bmax b J0(2ab) Omega(b) Phibar(b) db ] da,
  // with Phibar the phase average of the characteristic function.
  const PanelRule brule = radial_rule(c, radius);
  const std::size_t nb = brule.x.size();
  constexpr std::size_t m_phi = 256;
  std::vector<double> g(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    double phibar = 0.0;
    for (std::size_t m = 0; m < m_phi; ++m)
      phibar += gaussian_characteristic(state, brule.x[i],
                                        kPi * static_cast<double>(m) / m_phi);
    phibar /= static_cast<double>(m_phi);
    g[i] = brule.w[i] * brule.x[i] * filter_value(ev.profile(), brule.x[i]) * phibar;
  }

  const int a_panels =
      8 + static_cast<int>(std::ceil(radius * c.b_max / 4.0));
  const PanelRule arule = gl_panels(0.0, radius, a_panels, 16);
  double disc = 0.0;
  for (std::size_t j = 0; j < arule.x.size(); ++j) {
    const double a = arule.x[j];
    double inner = 0.0;
    for (std::size_t i = 0; i < nb; ++i)
      inner += g[i] * std::cyl_bessel_j(0.0, 2.0 * a * brule.x[i]);
    disc += arule.w[j] * a * inner;
  }
  return 4.0 * disc;
}

double filter_ft(const FilterProfile& profile, double r) {
  OracleConfig cfg;
  cfg.b_max = profile.b_cut;
  cfg.tolerance = 1e-7;
  const PanelRule rule = radial_rule(cfg, std::abs(r));
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i)
    acc += rule.w[i] * rule.x[i] * filter_value(profile, rule.x[i]) *
           std::cyl_bessel_j(0.0, 2.0 * std::abs(r) * rule.x[i]);
  return 2.0 / kPi * acc;
}

}  // namespace nqp
