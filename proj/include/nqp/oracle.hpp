#pragma once

#include <complex>
#include <cstddef>

#include "nqp/filter.hpp"
#include "nqp/gaussian_sim.hpp"

namespace nqp {

// Quadrature configuration for the analytic reference integrals.  Zero means
// "choose automatically from the oscillation scale 2|alpha| b_max"; explicit
// values are validated per call and rejected (with the required count) when
// they cannot resolve the integrand.
struct OracleConfig {
  double b_max = 0.0;           // radial cutoff; 0 -> 4w
  std::size_t radial_nodes = 0;   // nodes on [0, b_max]
  std::size_t angular_nodes = 0;  // nodes per [0, pi)
  double tolerance = 1e-7;        // absolute target; gates the imaginary residue
};

// Characteristic function of the P representation for a zero-mean Gaussian
// state: Phi(b e^{i phi}) = exp(b^2 (1 - V(phi - pi/2)) / 2).
double gaussian_characteristic(const GaussianStateSpec& state, double b, double phi);

// Direct-quadrature reference for the filtered quasiprobability and its
// discrete-phase variants, sharing one filter profile.
class OracleEvaluator {
 public:
  OracleEvaluator(const GaussianStateSpec& state, double width, OracleConfig cfg = {});

  // Continuous polar Fourier integral (1/pi^2) Int db dphi |b| e^{2i|a|b sin(arg a - phi)} Phi Omega.
  double value(std::complex<double> alpha) const;
  // Ideal-data expectation of the dither-averaged estimator on n_phases phases.
  double discrete_phase(std::complex<double> alpha, std::size_t n_phases,
                        double phase_offset = 0.0) const;
  // Negative control: plain Riemann phase sum without dithering.
  double riemann(std::complex<double> alpha, std::size_t n_phases,
                 double phase_offset = 0.0) const;

  const FilterProfile& profile() const { return profile_; }
  const GaussianStateSpec& state() const { return state_; }
  const OracleConfig& config() const { return cfg_; }

 private:
  GaussianStateSpec state_;
  OracleConfig cfg_;
  FilterProfile profile_;
};

double oracle_quasiprob(const GaussianStateSpec& state, std::complex<double> alpha,
                        double width, const OracleConfig& cfg = {});
double oracle_discrete_phase(const GaussianStateSpec& state, std::complex<double> alpha,
                             double width, std::size_t n_phases,
                             const OracleConfig& cfg = {});
// |continuous - discrete| at alpha.
double systematic_error(const GaussianStateSpec& state, std::complex<double> alpha,
                        double width, std::size_t n_phases,
                        const OracleConfig& cfg = {});
double riemann_sum_quasiprob(const GaussianStateSpec& state, std::complex<double> alpha,
                             double width, std::size_t n_phases,
                             const OracleConfig& cfg = {});

// Wigner density of the zero-mean Gaussian state (always positive).
double wigner_squeezed(const GaussianStateSpec& state, double x, double p);

// Integral of the quasiprobability over a disc of radius R; tends to 1.
double normalization_check(const GaussianStateSpec& state, double width,
                           double radius = 6.0, const OracleConfig& cfg = {});

// Fourier transform of the filter at radial distance r: the vacuum
// quasiprobability, nonnegative by construction.
double filter_ft(const FilterProfile& profile, double r);

}  // namespace nqp
