#include "nqp/quad.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nqp {

namespace {

// Newton iteration on P_n with the standard cosine initial guess.
GaussLegendre compute_gl(int n) {
  GaussLegendre r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    r.w[n - 1 - i] = r.w[i];
  }
  return r;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

PanelRule gl_panels(double a, double b, int panels, int per_panel) {
  if (panels < 1 || per_panel < 1) throw std::invalid_argument("gl_panels: bad rule size");
  const GaussLegendre& gl = gauss_legendre(per_panel);
  PanelRule r;
  r.x.reserve(static_cast<std::size_t>(panels) * per_panel);
  r.w.reserve(static_cast<std::size_t>(panels) * per_panel);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int j = 0; j < per_panel; ++j) {
      r.x.push_back(mid + 0.5 * h * gl.x[j]);
      r.w.push_back(0.5 * h * gl.w[j]);
    }
  }
  return r;
}

}  // namespace nqp
