#pragma once
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nqp/filter.hpp"

namespace nqp {

// Nyquist table of the pattern kernel chi(xi; w): coefficients chi(pi*j/b_cut)
// for j = 0..n_coeff-1 (evenness supplies j < 0).  Truncating the filter at
// b_cut makes chi band-limited, so the finite sinc series reconstructs it
// anywhere; `accuracy` is the measured sup-norm error of that reconstruction
// against direct quadrature of the defining integral.
struct ChiTable {
  double width = 0.0;
  double b_cut = 0.0;
  std::vector<double> coeffs;
  double accuracy = 0.0;
  std::size_t n_coeff() const { return coeffs.size(); }
  // precomputed helpers for the evaluator
  std::vector<double> signed_coeffs;  // (-1)^j coeffs[j]
  std::vector<double> pi2j2;          // (pi*j)^2
};

// Builds the table from the filter profile (b_cut = 4w enforced).  If the
// measured reconstruction accuracy exceeds 3.5e-5 the build retries once with
// twice the coefficients, then fails.
ChiTable build_chi_table(const FilterProfile& profile, std::size_t n_coeff = 256);

// Direct quadrature of chi(xi) = (2/pi) \int_0^{b_cut} b cos(b xi) e^{b^2/2}
// Omega_w(b) db; the slow reference used to verify the sinc reconstruction.
double chi_direct(const FilterProfile& profile, double xi);

// Finite sinc-series evaluation; even in xi by construction and exact at the
// stored nodes.
double chi(const ChiTable& table, double xi);

// f_Omega(x, phi; alpha, w) = chi(x + 2|alpha| sin(arg(alpha) - phi - pi/2)).
double pattern_value(const ChiTable& table, double x, double phi,
                     std::complex<double> alpha);

// Uniform dither offset u in [-pi/(2 n_phases), +pi/(2 n_phases)], keyed by
// (seed, phase index, sample ordinal); requires an equispaced phase grid.
double dither_offset(std::uint64_t dither_seed, std::size_t phase_k,
                     std::uint64_t sample_i, std::size_t n_phases);
double dither_phase(double phi_k, std::size_t n_phases, std::uint64_t dither_seed,
                    std::size_t phase_k, std::uint64_t sample_i);

// Cell average of the pattern function over the dither interval (the
// quadrature oracle for the Monte-Carlo dithering path):
//   f~(x, phi_k; alpha) = (N/pi) \int_{-pi/2N}^{pi/2N} f(x, phi_k + u) du.
double modified_pattern_value(const ChiTable& table, double x, double phi_k,
                              std::complex<double> alpha, std::size_t n_phases);

// Optional fast path: dense uniform lookup of chi with cubic interpolation,
// validated against the sinc sum.  The build starts from step pi/(8 b_cut)
// and refines until the validation error is <= 1e-6.
struct ChiDense {
  double b_cut = 0.0;
  double step = 0.0;
  double xi_max = 0.0;
  std::vector<double> values;  // chi on 0, step, 2*step, ...
  double max_err = 0.0;        // measured against the sinc sum
};
ChiDense build_chi_dense(const ChiTable& table, double xi_max);
double chi_dense(const ChiDense& dense, const ChiTable& table, double xi);

// CSV dump `xi,chi` (plotting aid).
void dump_chi_csv(const ChiTable& table, std::ostream& os, double xi_max,
                  double xi_step);

}  // namespace nqp
