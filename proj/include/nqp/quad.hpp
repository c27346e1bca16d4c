#pragma once
#include <cstddef>
#include <vector>

namespace nqp {

// Gauss-Legendre nodes/weights on [-1, 1]; cached per order, thread-safe.
struct GaussLegendre {
  std::vector<double> x, w;
};
const GaussLegendre& gauss_legendre(int n);

// Composite rule: `panels` equal panels on [a, b] with `per_panel` GL nodes each.
struct PanelRule {
  std::vector<double> x, w;
};
PanelRule gl_panels(double a, double b, int panels, int per_panel);

}  // namespace nqp
