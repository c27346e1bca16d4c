#pragma once
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace nqp {

// omega(|beta|) = exp(-|beta|^4), the square-integrable seed of the filter.
double omega_base(double r);

// Radial table of the nonclassicality filter Omega_w(b) on [0, b_cut], where
// Omega_w(b) = Omega_1(b/w) and Omega_1 is the normalized autocorrelation of
// omega.  Omega_1(0) = 1; the support is truncated at b_cut = 4w where the
// filter has fallen below 1e-15.
struct FilterProfile {
  double width = 0.0;
  double b_cut = 0.0;              // 4 * width
  std::vector<double> nodes;       // uniform radii in [0, b_cut]
  std::vector<double> values;      // Omega_w at the nodes
  double normalization = 0.0;      // N = \int d2b' omega(|b'|)^2  (= pi*sqrt(2*pi)/4)
  double quad_error = 0.0;         // estimated quadrature error of the table
};

FilterProfile build_filter_profile(double width, std::size_t n_nodes = 2048);

// Interpolated lookup: cubic through the nodes for |b| <= b_cut, exactly 0
// beyond, even in b, exact at the nodes.
double filter_value(const FilterProfile& profile, double b);

// CSV dump `b,omega` (plotting aid; not consumed elsewhere).
void dump_filter_csv(const FilterProfile& profile, std::ostream& os);

}  // namespace nqp
