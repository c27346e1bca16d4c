#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "nqp/filter.hpp"
#include "nqp/pattern.hpp"
#include "nqp/rng.hpp"

using namespace nqp;
constexpr double kPi = std::numbers::pi;

namespace {

const FilterProfile& profile13() {
  static const FilterProfile p = build_filter_profile(1.3);
  return p;
}

const ChiTable& table13() {
  static const ChiTable t = build_chi_table(profile13(), 256);
  return t;
}

// Independent adaptive quadrature of the defining integral (shares nothing
// with the library's fixed-panel rule).
double chi_adaptive(const FilterProfile& p, double xi) {
  const auto f = [&](double b) {
    return b * std::cos(b * xi) * std::exp(0.5 * b * b) * filter_value(p, b);
  };
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, p.b_cut, 12, 1e-12);
  return 2.0 * val / kPi;
}

}  // namespace

TEST_CASE("chi table build: gates and determinism") {
  const ChiTable& t = table13();
  CHECK(t.n_coeff() == 256);
  CHECK(t.width == 1.3);
  CHECK(t.b_cut == doctest::Approx(5.2).epsilon(1e-15));
  CHECK(t.accuracy <= 3.5e-5);
  double cmax = 0.0;
  for (double c : t.coeffs) cmax = std::max(cmax, std::abs(c));
  CHECK(std::abs(t.coeffs.back()) < 1e-5 * cmax);

  const ChiTable again = build_chi_table(profile13(), 256);
  CHECK(again.coeffs == t.coeffs);

  CHECK_THROWS_AS(build_chi_table(profile13(), 8), std::invalid_argument);
}

TEST_CASE("chi reproduces its nodes and is even") {
  const ChiTable& t = table13();
  for (std::size_t j : {std::size_t(0), std::size_t(1), std::size_t(17),
                        std::size_t(100), std::size_t(255)}) {
    const double xi = kPi * static_cast<double>(j) / t.b_cut;
    CHECK(std::abs(chi(t, xi) - t.coeffs[j]) <= 1e-12);
  }
  for (double xi : {0.0, 0.37, 2.0, 13.5, 151.0}) CHECK(chi(t, xi) == chi(t, -xi));
}

TEST_CASE("chi value at the origin") {
  CHECK(chi(table13(), 0.0) == doctest::Approx(3.03358224870856).epsilon(1e-9));
}

TEST_CASE("chi matches independent adaptive quadrature") {
  const ChiTable& t = table13();
  double sup = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const double xi = 40.0 * uniform01(99, 0, i) - 20.0;
    sup = std::max(sup, std::abs(chi(t, xi) - chi_adaptive(profile13(), xi)));
  }
  CHECK(sup <= 3.5e-5);
}

TEST_CASE("chi direct quadrature agrees with the sinc reconstruction") {
  const ChiTable& t = table13();
  for (double xi : {0.0, 0.5, 3.3, 11.7, 19.9})
    CHECK(std::abs(chi(t, xi) - chi_direct(profile13(), xi)) <= 3.5e-5);
}

TEST_CASE("chi far tail is small and finite") {
  const ChiTable& t = table13();
  const double v30 = chi(t, 30.0);
  CHECK(std::abs(v30) < 1e-3);
  CHECK(v30 < 0.0);  // kink asymptote -2/(pi xi^2)
  CHECK(std::abs(v30 + 2.0 / (kPi * 900.0)) < 3e-5);
  CHECK(std::isfinite(chi(t, 200.0)));
  CHECK(std::abs(chi(t, 200.0)) < 1e-4);
  CHECK(std::isfinite(chi(t, 1e6)));
}

TEST_CASE("pattern value: alpha = 0 reduces to chi(x)") {
  const ChiTable& t = table13();
  for (double x : {-2.0, 0.0, 0.9, 5.5})
    CHECK(pattern_value(t, x, 0.7, {0.0, 0.0}) == chi(t, x));
}

TEST_CASE("pattern value: Im-axis alpha at phase 0 gives an unshifted kernel") {
  const ChiTable& t = table13();
  CHECK(pattern_value(t, 0.0, 0.0, {0.0, 0.9}) == doctest::Approx(chi(t, 0.0)));
  // At phase pi/2 the same alpha shifts by -2|alpha|.
  CHECK(pattern_value(t, 0.0, kPi / 2.0, {0.0, 0.9}) ==
        doctest::Approx(chi(t, 1.8)).epsilon(1e-12));
}

TEST_CASE("dither offsets: bounds, reproducibility, key sensitivity") {
  const std::size_t n_phases = 21;
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const double u = dither_offset(11, 3, i, n_phases);
    CHECK(std::abs(u) <= kPi / (2.0 * n_phases));
    sum += u;
  }
  // Uniform mean: 0 within 5 sigma = 5 * (half-width/sqrt(3)) / sqrt(n).
  CHECK(std::abs(sum / 20000.0) <
        5.0 * (kPi / 42.0) / std::sqrt(3.0) / std::sqrt(20000.0));

  CHECK(dither_offset(11, 3, 5, n_phases) == dither_offset(11, 3, 5, n_phases));
  CHECK(dither_offset(11, 3, 5, n_phases) != dither_offset(11, 3, 6, n_phases));
  CHECK(dither_offset(11, 4, 5, n_phases) != dither_offset(11, 3, 5, n_phases));
  CHECK(dither_offset(12, 3, 5, n_phases) != dither_offset(11, 3, 5, n_phases));
  CHECK(dither_phase(0.3, n_phases, 11, 3, 5) ==
        0.3 + dither_offset(11, 3, 5, n_phases));
  CHECK_THROWS_AS(dither_offset(11, 3, 5, 0), std::invalid_argument);
}

TEST_CASE("modified pattern value: alpha = 0 is exactly the plain kernel") {
  const ChiTable& t = table13();
  for (double x : {-1.0, 0.0, 2.2})
    CHECK(modified_pattern_value(t, x, 0.4, {0.0, 0.0}, 21) ==
          doctest::Approx(chi(t, x)).epsilon(1e-13));
}

TEST_CASE("modified pattern value equals the Monte-Carlo dither average") {
  const ChiTable& t = table13();
  const double x = 0.7, phi = 2.0 * kPi / 21.0;
  const std::complex<double> alpha{0.0, 0.9};
  const std::size_t n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double v = pattern_value(t, x, dither_phase(phi, 21, 5, 2, i), alpha);
    sum += v;
    sum2 += v * v;
  }
  const double mc = sum / n;
  const double se = std::sqrt((sum2 / n - mc * mc) / (n - 1.0));
  const double quad = modified_pattern_value(t, x, phi, alpha, 21);
  CHECK(std::abs(mc - quad) <= 5.0 * se);
}

TEST_CASE("modified pattern value converges to the plain pattern value") {
  const ChiTable& t = table13();
  const double x = -0.4, phi = 5.0 * kPi / 21.0;
  const std::complex<double> alpha{0.3, 0.8};
  const double plain = pattern_value(t, x, phi, alpha);
  double prev = 1e9;
  for (std::size_t n_phases : {21, 84, 336, 1344}) {
    const double diff = std::abs(modified_pattern_value(t, x, phi, alpha, n_phases) - plain);
    CHECK(diff < prev);
    prev = diff;
  }
  CHECK(std::abs(modified_pattern_value(t, x, phi, alpha, 10000) - plain) <= 1e-6);
}

TEST_CASE("dense kernel lookup passes and matches chi to 1e-6") {
  const ChiTable& t = table13();
  const ChiDense d = build_chi_dense(t, 25.0);
  CHECK(d.max_err <= 1e-6);
  double sup = 0.0;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const double xi = 50.0 * uniform01(7, 1, i) - 25.0;
    sup = std::max(sup, std::abs(chi_dense(d, t, xi) - chi(t, xi)));
  }
  CHECK(sup <= 1e-6);
  // Beyond the tabulated range the lookup falls back to the exact evaluator.
  CHECK(chi_dense(d, t, 40.0) == chi(t, 40.0));
}

TEST_CASE("kernel dump CSV") {
  std::ostringstream os;
  dump_chi_csv(table13(), os, 1.0, 0.25);
  const std::string text = os.str();
  CHECK(text.rfind("xi,chi\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 6);  // header + xi in {0, 0.25, 0.5, 0.75, 1.0}
}
