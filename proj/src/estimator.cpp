#include "nqp/estimator.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nqp/io.hpp"

namespace nqp {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t axis_count(double lo, double hi, double step, const char* what) {
  if (!(step > 0.0)) throw std::invalid_argument(std::string(what) + ": step must be > 0");
  if (!(hi >= lo)) throw std::invalid_argument(std::string(what) + ": max must be >= min");
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1.0 + 1e-9));
}

}  // namespace

GridSpec GridSpec::grid2d(double re_min, double re_max, double re_step, double im_min,
                          double im_max, double im_step) {
  GridSpec s{re_min, re_max, re_step, im_min, im_max, im_step};
  s.n_re();
  s.n_im();
  return s;
}

GridSpec GridSpec::axis_im(double im_min, double im_max, double im_step) {
  GridSpec s{0.0, 0.0, 1.0, im_min, im_max, im_step};
  s.n_im();
  return s;
}

std::size_t GridSpec::n_re() const { return axis_count(re_min, re_max, re_step, "grid re"); }
std::size_t GridSpec::n_im() const { return axis_count(im_min, im_max, im_step, "grid im"); }

std::complex<double> GridSpec::point(std::size_t index) const {
  const std::size_t ni = n_im();
  const std::size_t ir = index / ni;
  const std::size_t ii = index % ni;
  return {re_min + static_cast<double>(ir) * re_step,
          im_min + static_cast<double>(ii) * im_step};
}

std::vector<std::complex<double>> GridSpec::points() const {
  std::vector<std::complex<double>> out;
  const std::size_t n = size();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(point(i));
  return out;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  if (n_re() == 1 && re_min == 0.0) {
    os << "im:" << fmt17(im_min) << ',' << fmt17(im_max) << ',' << fmt17(im_step);
  } else {
    os << "re:" << fmt17(re_min) << ',' << fmt17(re_max) << ',' << fmt17(re_step)
       << ",im:" << fmt17(im_min) << ',' << fmt17(im_max) << ',' << fmt17(im_step);
  }
  return os.str();
}

GridSpec parse_grid_spec(const std::string& text) {
  auto parse_triple = [](const std::string& s, const char* what, double out[3]) {
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t end = (i < 2) ? s.find(',', pos) : s.size();
      if (end == std::string::npos)
        throw std::invalid_argument(std::string("grid spec: expected a,b,step after '") +
                                    what + ":'");
      const std::string tok = s.substr(pos, end - pos);
      std::size_t used = 0;
      try {
        out[i] = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("grid spec: bad number '" + tok + "'");
      }
      if (used != tok.size())
        throw std::invalid_argument("grid spec: bad number '" + tok + "'");
      pos = end + 1;
    }
  };
  double t[3];
  if (text.rfind("im:", 0) == 0) {
    parse_triple(text.substr(3), "im", t);
    return GridSpec::axis_im(t[0], t[1], t[2]);
  }
  if (text.rfind("re:", 0) == 0) {
    const std::size_t imp = text.find(",im:");
    if (imp == std::string::npos)
      throw std::invalid_argument("grid spec: expected 're:a,b,step,im:a,b,step'");
    parse_triple(text.substr(3, imp - 3), "re", t);
    double u[3];
    parse_triple(text.substr(imp + 4), "im", u);
    return GridSpec::grid2d(t[0], t[1], t[2], u[0], u[1], u[2]);
  }
  throw std::invalid_argument("grid spec must start with 're:' or 'im:', got '" + text +
                              "'");
}

DitherCache build_dither_cache(const QuadratureDataset& dataset,
                               std::uint64_t dither_seed) {
  DitherCache c;
  c.dither_seed = dither_seed;
  const std::size_t n = dataset.x.size();
  const std::size_t n_phases = dataset.grid.phases.size();
  c.cos_u.resize(n);
  c.sin_u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = dither_offset(dither_seed,
                                   static_cast<std::size_t>(dataset.phase_index[i]),
                                   dataset.ordinal[i], n_phases);
    c.cos_u[i] = std::cos(u);
    c.sin_u[i] = std::sin(u);
  }
  return c;
}

namespace {

// Streaming moments: Welford updates within fixed 4096-sample blocks, then a
// pairwise tree merge over blocks.  The partition depends only on the data
// size, so results are bit-identical for any worker count.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    n += 1.0;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
};

Moments merge(const Moments& a, const Moments& b) {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  Moments r;
  r.n = a.n + b.n;
  const double d = b.mean - a.mean;
  r.mean = a.mean + d * (b.n / r.n);
  r.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / r.n);
  return r;
}

constexpr std::size_t kBlock = 4096;

template <typename Kernel>
PointEstimate estimate_point_with(const QuadratureDataset& dataset,
                                  const DitherCache& cache, std::complex<double> alpha,
                                  Kernel&& kernel) {
  const std::size_t n = dataset.x.size();
  const std::size_t n_phases = dataset.grid.phases.size();
  const double a = std::abs(alpha);
  const double theta = (a == 0.0) ? 0.0 : std::arg(alpha);
  // shift(phi + u) = 2a sin(theta - phi - u - pi/2) = 2a (sin A cos u - cos A sin u)
  // with A = theta - phi_k - pi/2 hoisted per phase.
  std::vector<double> sin_a(n_phases), cos_a(n_phases);
  for (std::size_t k = 0; k < n_phases; ++k) {
    const double A = theta - dataset.grid.phases[k] - kPi / 2.0;
    sin_a[k] = std::sin(A);
    cos_a[k] = std::cos(A);
  }
  const double twoa = 2.0 * a;

  std::vector<Moments> blocks;
  blocks.reserve(n / kBlock + 1);
  Moments cur;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(dataset.phase_index[i]);
    const double xi =
        dataset.x[i] + twoa * (sin_a[k] * cache.cos_u[i] - cos_a[k] * cache.sin_u[i]);
    cur.add(kernel(xi));
    if (cur.n == static_cast<double>(kBlock)) {
      blocks.push_back(cur);
      cur = Moments{};
    }
  }
  if (cur.n > 0.0) blocks.push_back(cur);
  while (blocks.size() > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < blocks.size(); i += 2)
      blocks[out++] = merge(blocks[i], blocks[i + 1]);
    if (blocks.size() % 2 == 1) blocks[out++] = blocks.back();
    blocks.resize(out);
  }
  const Moments total = blocks.front();

  PointEstimate p;
  p.alpha = alpha;
  p.n = static_cast<std::uint64_t>(total.n);
  p.value = total.mean;
  p.std_err =
      (p.n >= 2) ? std::sqrt(total.m2 / (total.n - 1.0) / total.n) : 0.0;
  return p;
}

void require_usable(const QuadratureDataset& dataset) {
  if (dataset.x.empty()) throw std::invalid_argument("estimator: dataset is empty");
  if (!dataset.grid.equispaced)
    throw std::invalid_argument(
        "estimator: phase grid is not equispaced; the dither cell decomposition "
        "is defined only for equispaced phases");
}

}  // namespace

PointEstimate estimate_point(const QuadratureDataset& dataset, const ChiTable& table,
                             std::complex<double> alpha, std::uint64_t dither_seed) {
  require_usable(dataset);
  const DitherCache cache = build_dither_cache(dataset, dither_seed);
  return estimate_point_with(dataset, cache, alpha,
                             [&](double xi) { return chi(table, xi); });
}

QuasiprobGrid estimate_grid(const QuadratureDataset& dataset, const ChiTable& table,
                            const GridSpec& spec, std::uint64_t dither_seed,
                            const EstimateOptions& opts) {
  require_usable(dataset);
  const std::size_t n_points = spec.size();
  if (n_points == 0) throw std::invalid_argument("estimator: empty grid");

  QuasiprobGrid grid;
  grid.spec = spec;
  grid.width = table.width;
  grid.dither_seed = dither_seed;
  grid.points.resize(n_points);

  const DitherCache cache = build_dither_cache(dataset, dither_seed);

  ChiDense dense;
  if (opts.fast_chi) {
    double xmax = 0.0;
    for (double v : dataset.x) xmax = std::max(xmax, std::abs(v));
    double amax = 0.0;
    for (std::size_t i = 0; i < n_points; ++i)
      amax = std::max(amax, std::abs(spec.point(i)));
    dense = build_chi_dense(table, xmax + 2.0 * amax + 1.0);
  }

  auto run_point = [&](std::size_t i) {
    const std::complex<double> alpha = spec.point(i);
    if (opts.fast_chi) {
      grid.points[i] = estimate_point_with(
          dataset, cache, alpha, [&](double xi) { return chi_dense(dense, table, xi); });
    } else {
      grid.points[i] = estimate_point_with(dataset, cache, alpha,
                                           [&](double xi) { return chi(table, xi); });
    }
  };

  std::size_t n_threads = opts.threads
                              ? opts.threads
                              : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, n_points);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n_points; ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        try {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_points) break;
            run_point(i);
          }
        } catch (...) {
          const std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  return grid;
}

Significance significance(const QuasiprobGrid& grid) {
  if (grid.points.empty()) throw std::invalid_argument("significance: empty grid");
  Significance best;
  bool have = false;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const PointEstimate& p = grid.points[i];
    if (!(p.std_err > 0.0) || !std::isfinite(p.std_err))
      throw std::invalid_argument(
          "significance: standard error is zero or invalid at grid index " +
          std::to_string(i) + " (degenerate sample count?)");
    const double z = p.value / p.std_err;
    if (!have || z < best.sigma) {
      best.sigma = z;
      best.argmin = p.alpha;
      best.index = i;
      have = true;
    }
  }
  return best;
}

WidthScanResult scan_width(const QuadratureDataset& dataset,
                           const std::vector<double>& widths, const GridSpec& spec,
                           std::uint64_t dither_seed, const EstimateOptions& opts) {
  if (widths.empty()) throw std::invalid_argument("scan_width: empty width list");
  WidthScanResult result;
  result.entries.reserve(widths.size());
  for (double w : widths) {
    WidthScanEntry e;
    e.width = w;
    try {
      const FilterProfile profile = build_filter_profile(w, opts.n_nodes);
      const ChiTable table = build_chi_table(profile, opts.n_coeff);
      const QuasiprobGrid grid = estimate_grid(dataset, table, spec, dither_seed, opts);
      const Significance sig = significance(grid);
      e.sigma = sig.sigma;
      e.argmin = sig.argmin;
      e.ok = true;
    } catch (const std::exception& ex) {
      e.sigma = std::nan("");
      e.argmin = {std::nan(""), std::nan("")};
      e.ok = false;
      e.note = ex.what();
    }
    result.entries.push_back(std::move(e));
  }
  bool have = false;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    const WidthScanEntry& e = result.entries[i];
    if (!e.ok) continue;
    const WidthScanEntry& b = result.entries[result.optimum];
    if (!have || e.sigma < b.sigma || (e.sigma == b.sigma && e.width < b.width)) {
      result.optimum = i;
      have = true;
    }
  }
  if (!have) throw NumericGateError("scan_width: every width failed to evaluate");
  return result;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_grid_csv(const QuasiprobGrid& grid, std::ostream& os) {
  os << "re_alpha,im_alpha,p,std_err\n";
  for (const PointEstimate& p : grid.points)
    os << fmt17(p.alpha.real()) << ',' << fmt17(p.alpha.imag()) << ','
       << fmt17(p.value) << ',' << fmt17(p.std_err) << '\n';
}

void write_scan_csv(const WidthScanResult& scan, std::ostream& os) {
  os << "w,sigma,argmin_re,argmin_im,note\n";
  for (const WidthScanEntry& e : scan.entries)
    os << fmt17(e.width) << ',' << fmt17(e.sigma) << ',' << fmt17(e.argmin.real())
       << ',' << fmt17(e.argmin.imag()) << ',' << csv_quote(e.note) << '\n';
}

std::string grid_csv_string(const QuasiprobGrid& grid) {
  std::ostringstream os;
  write_grid_csv(grid, os);
  return os.str();
}

std::string scan_csv_string(const WidthScanResult& scan) {
  std::ostringstream os;
  write_scan_csv(scan, os);
  return os.str();
}

}  // namespace nqp
