#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nqp/gaussian_sim.hpp"
#include "nqp/pattern.hpp"

namespace nqp {

// Rectangular phase-space grid; an axis cross-section is the degenerate case
// with a single Re value.  Points are enumerated row-major: Re outer, Im inner.
struct GridSpec {
  double re_min = -3.0, re_max = 3.0, re_step = 0.1;
  double im_min = -3.0, im_max = 3.0, im_step = 0.1;

  static GridSpec grid2d(double re_min, double re_max, double re_step,
                         double im_min, double im_max, double im_step);
  static GridSpec axis_im(double im_min, double im_max, double im_step);

  std::size_t n_re() const;
  std::size_t n_im() const;
  std::size_t size() const { return n_re() * n_im(); }
  std::complex<double> point(std::size_t index) const;
  std::vector<std::complex<double>> points() const;
  std::string describe() const;
};

// "re:a,b,step,im:a,b,step" or "im:a,b,step" (axis shorthand, Re fixed to 0).
GridSpec parse_grid_spec(const std::string& text);

struct PointEstimate {
  std::complex<double> alpha;
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t n = 0;
};

struct QuasiprobGrid {
  GridSpec spec;
  double width = 0.0;
  std::uint64_t dither_seed = 0;
  std::vector<PointEstimate> points;
};

struct Significance {
  double sigma = 0.0;
  std::complex<double> argmin;
  std::size_t index = 0;
};

struct WidthScanEntry {
  double width = 0.0;
  double sigma = 0.0;
  std::complex<double> argmin;
  bool ok = false;
  std::string note;  // failure reason when !ok
};

struct WidthScanResult {
  std::vector<WidthScanEntry> entries;
  std::size_t optimum = 0;  // index into entries; most negative sigma, ties -> smaller w
};

struct EstimateOptions {
  std::size_t threads = 0;   // 0 = hardware concurrency
  bool fast_chi = false;     // evaluate the kernel through a validated dense lookup
  std::size_t n_nodes = 2048;  // filter profile nodes (width scans rebuild per width)
  std::size_t n_coeff = 256;   // kernel coefficients
};

// Per-sample dither factors (cos u_i, sin u_i), shared across all grid points.
struct DitherCache {
  std::uint64_t dither_seed = 0;
  std::vector<double> cos_u;
  std::vector<double> sin_u;
};

DitherCache build_dither_cache(const QuadratureDataset& dataset,
                               std::uint64_t dither_seed);

PointEstimate estimate_point(const QuadratureDataset& dataset, const ChiTable& table,
                             std::complex<double> alpha, std::uint64_t dither_seed);

QuasiprobGrid estimate_grid(const QuadratureDataset& dataset, const ChiTable& table,
                            const GridSpec& spec, std::uint64_t dither_seed,
                            const EstimateOptions& opts = {});

Significance significance(const QuasiprobGrid& grid);

WidthScanResult scan_width(const QuadratureDataset& dataset,
                           const std::vector<double>& widths, const GridSpec& spec,
                           std::uint64_t dither_seed,
                           const EstimateOptions& opts = {});

void write_grid_csv(const QuasiprobGrid& grid, std::ostream& os);
void write_scan_csv(const WidthScanResult& scan, std::ostream& os);
std::string grid_csv_string(const QuasiprobGrid& grid);
std::string scan_csv_string(const WidthScanResult& scan);

}  // namespace nqp
