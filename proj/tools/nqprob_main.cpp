// nqprob: sample-based nonclassicality quasiprobabilities from homodyne
// quadrature data -- simulate, estimate, scan widths, run analytic references,
// and compare, emitting CSV/JSON artifacts with reproducible manifests.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nqp/estimator.hpp"
#include "nqp/filter.hpp"
#include "nqp/gaussian_sim.hpp"
#include "nqp/io.hpp"
#include "nqp/oracle.hpp"
#include "nqp/pattern.hpp"

namespace {

using nlohmann::json;
using namespace nqp;

std::vector<std::string> g_argv;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const std::string& out_path, const std::string& command,
                    json flags, double wall_s) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["argv"] = g_argv;
  m["flags"] = std::move(flags);
  m["wall_time_s"] = wall_s;
  write_text_atomic(out_path + ".manifest.json", m.dump(2) + "\n");
}

std::vector<double> parse_width_list(const std::string& text) {
  std::vector<double> widths;
  const auto to_double = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw UsageError("bad width value '" + tok + "'");
    }
    if (used != tok.size()) throw UsageError("bad width value '" + tok + "'");
    return v;
  };
  const std::size_t c1 = text.find(':');
  if (c1 == std::string::npos) {
    widths.push_back(to_double(text));
    return widths;
  }
  const std::size_t c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw UsageError("widths must be 'w' or 'a:b:step', got '" + text + "'");
  const double a = to_double(text.substr(0, c1));
  const double b = to_double(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = to_double(text.substr(c2 + 1));
  if (!(step > 0.0)) throw UsageError("widths: step must be > 0");
  if (!(b >= a)) throw UsageError("widths: upper bound must be >= lower bound");
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1.0 + 1e-9));
  for (std::size_t k = 0; k < n; ++k) widths.push_back(a + static_cast<double>(k) * step);
  return widths;
}

struct GridFlags {
  std::string grid;
  std::string axis;

  GridSpec resolve() const {
    if (!axis.empty()) {
      if (axis.rfind("im:", 0) != 0)
        throw UsageError("--axis expects 'im:a,b,step', got '" + axis + "'");
      return parse_grid_spec(axis);
    }
    if (!grid.empty()) return parse_grid_spec(grid);
    return GridSpec{};  // default 2D grid
  }

  json to_json() const { return json{{"grid", grid}, {"axis", axis}}; }
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
  auto* go = cmd->add_option("--grid", g.grid,
                             "2D grid 're:min,max,step,im:min,max,step' "
                             "(default re:-3,3,0.1,im:-3,3,0.1)");
  cmd->add_option("--axis", g.axis, "Im-axis cross-section 'im:min,max,step'")
      ->excludes(go);
}

// ---------------------------------------------------------------- simulate --

int run_simulate(double vx, double vp, std::size_t phases, std::size_t n_per_phase,
                 std::uint64_t seed, const std::string& out) {
  const Stopwatch timer;
  const GaussianStateSpec state(vx, vp);
  const QuadratureDataset ds =
      simulate_quadratures(state, PhaseGrid::regular(phases), n_per_phase, seed);
  save_dataset(ds, out);
  write_manifest(out, "simulate",
                 json{{"vx", vx},
                      {"vp", vp},
                      {"phases", phases},
                      {"n_per_phase", n_per_phase},
                      {"seed", seed},
                      {"out", out},
                      {"dataset_hash", hex64(dataset_hash(ds))}},
                 timer.seconds());
  std::cout << "wrote " << out << ": " << ds.x.size() << " samples over " << phases
            << " phases (hash " << hex64(dataset_hash(ds)) << ")\n";
  return 0;
}

// ---------------------------------------------------------------- estimate --

int run_estimate(const std::string& in, double width, const GridFlags& gridf,
                 std::uint64_t dither_seed, const std::string& out,
                 const EstimateOptions& opts) {
  const Stopwatch timer;
  const QuadratureDataset ds = load_dataset(in);
  const GridSpec spec = gridf.resolve();
  const FilterProfile profile = build_filter_profile(width, opts.n_nodes);
  const ChiTable table = build_chi_table(profile, opts.n_coeff);
  const QuasiprobGrid grid = estimate_grid(ds, table, spec, dither_seed, opts);
  write_text_atomic(out, grid_csv_string(grid));
  const Significance sig = significance(grid);
  write_manifest(out, "estimate",
                 json{{"in", in},
                      {"dataset_hash", hex64(dataset_hash(ds))},
                      {"width", width},
                      {"grid", spec.describe()},
                      {"dither_seed", dither_seed},
                      {"threads", opts.threads},
                      {"fast_chi", opts.fast_chi},
                      {"n_nodes", opts.n_nodes},
                      {"n_coeff", opts.n_coeff},
                      {"out", out}},
                 timer.seconds());
  std::cout << "wrote " << out << ": " << grid.points.size() << " points\n"
            << "Sigma = " << fmt17(sig.sigma) << " at alpha = ("
            << fmt17(sig.argmin.real()) << ", " << fmt17(sig.argmin.imag())
            << "), width " << fmt17(width) << ", n = " << grid.points[sig.index].n
            << ", P = " << fmt17(grid.points[sig.index].value) << " +- "
            << fmt17(grid.points[sig.index].std_err) << "\n";
  return 0;
}

// -------------------------------------------------------------------- scan --

int run_scan(const std::string& in, const std::string& widths_text,
             const GridFlags& gridf, std::uint64_t dither_seed, const std::string& out,
             const EstimateOptions& opts) {
  const Stopwatch timer;
  const QuadratureDataset ds = load_dataset(in);
  const GridSpec spec = gridf.resolve();
  const std::vector<double> widths = parse_width_list(widths_text);
  const WidthScanResult scan = scan_width(ds, widths, spec, dither_seed, opts);
  write_text_atomic(out, scan_csv_string(scan));
  const WidthScanEntry& best = scan.entries[scan.optimum];
  write_manifest(out, "scan",
                 json{{"in", in},
                      {"dataset_hash", hex64(dataset_hash(ds))},
                      {"widths", widths},
                      {"grid", spec.describe()},
                      {"dither_seed", dither_seed},
                      {"threads", opts.threads},
                      {"fast_chi", opts.fast_chi},
                      {"n_nodes", opts.n_nodes},
                      {"n_coeff", opts.n_coeff},
                      {"out", out}},
                 timer.seconds());
  std::cout << "wrote " << out << ": " << scan.entries.size() << " widths\n"
            << "optimal width w = " << fmt17(best.width)
            << " with Sigma = " << fmt17(best.sigma) << " at alpha = ("
            << fmt17(best.argmin.real()) << ", " << fmt17(best.argmin.imag()) << ")\n";
  for (const WidthScanEntry& e : scan.entries)
    if (!e.ok)
      std::cerr << "note: width " << fmt17(e.width) << " failed: " << e.note << "\n";
  return 0;
}

// ------------------------------------------------------------------ oracle --

int run_oracle(double vx, double vp, double width, const GridFlags& gridf,
               std::size_t phases, bool riemann, const std::string& out,
               const OracleConfig& cfg) {
  const Stopwatch timer;
  if (riemann && phases == 0)
    throw UsageError("--riemann requires --phases (the phase count of the sum)");
  const GaussianStateSpec state(vx, vp);
  const GridSpec spec = gridf.resolve();
  const OracleEvaluator ev(state, width, cfg);

  std::ostringstream os;
  os << "re_alpha,im_alpha,p,std_err";
  if (phases > 0) os << ",p_discrete,syst_err";
  if (riemann) os << ",p_riemann";
  os << '\n';
  const std::size_t n = spec.size();
  double min_p = 0.0;
  std::complex<double> min_alpha;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> alpha = spec.point(i);
    const double p = ev.value(alpha);
    if (i == 0 || p < min_p) {
      min_p = p;
      min_alpha = alpha;
    }
    os << fmt17(alpha.real()) << ',' << fmt17(alpha.imag()) << ',' << fmt17(p) << ",0";
    if (phases > 0) {
      const double pd = ev.discrete_phase(alpha, phases);
      os << ',' << fmt17(pd) << ',' << fmt17(std::abs(p - pd));
    }
    if (riemann) os << ',' << fmt17(ev.riemann(alpha, phases));
    os << '\n';
  }
  write_text_atomic(out, os.str());
  write_manifest(out, "oracle",
                 json{{"vx", vx},
                      {"vp", vp},
                      {"width", width},
                      {"grid", spec.describe()},
                      {"phases", phases},
                      {"riemann", riemann},
                      {"b_max", cfg.b_max},
                      {"radial_nodes", cfg.radial_nodes},
                      {"angular_nodes", cfg.angular_nodes},
                      {"tolerance", cfg.tolerance},
                      {"out", out}},
                 timer.seconds());
  std::cout << "wrote " << out << ": " << n << " points\n"
            << "min P = " << fmt17(min_p) << " at alpha = (" << fmt17(min_alpha.real())
            << ", " << fmt17(min_alpha.imag()) << ")\n";
  return 0;
}

// ------------------------------------------------------------------ kernel --

int run_kernel(double width, std::size_t n_nodes, std::size_t n_coeff, double xi_max,
               double xi_step, const std::string& out, const std::string& filter_out) {
  const Stopwatch timer;
  const FilterProfile profile = build_filter_profile(width, n_nodes);
  const ChiTable table = build_chi_table(profile, n_coeff);
  {
    std::ostringstream os;
    dump_chi_csv(table, os, xi_max, xi_step);
    write_text_atomic(out, os.str());
  }
  if (!filter_out.empty()) {
    std::ostringstream os;
    dump_filter_csv(profile, os);
    write_text_atomic(filter_out, os.str());
  }
  write_manifest(out, "kernel",
                 json{{"width", width},
                      {"n_nodes", n_nodes},
                      {"n_coeff", n_coeff},
                      {"xi_max", xi_max},
                      {"xi_step", xi_step},
                      {"out", out},
                      {"filter_out", filter_out}},
                 timer.seconds());
  std::cout << "wrote " << out << " (kernel accuracy " << fmt17(table.accuracy)
            << ", " << table.n_coeff() << " coefficients)\n";
  return 0;
}

// ----------------------------------------------------------------- compare --

struct GridFile {
  std::vector<std::complex<double>> alpha;
  std::vector<double> p;
  std::vector<double> std_err;  // zero when absent
};

GridFile read_grid_csv(const std::string& path) {
  const std::string text = read_text(path);
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
  }
  auto col_of = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  const std::ptrdiff_t c_re = col_of("re_alpha"), c_im = col_of("im_alpha"),
                       c_p = col_of("p"), c_se = col_of("std_err");
  if (c_re < 0 || c_im < 0 || c_p < 0)
    throw IoError(path + ": expected columns re_alpha,im_alpha,p");
  GridFile g;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + tok +
                      "'");
      }
    }
    if (vals.size() < cols.size())
      throw IoError(path + ":" + std::to_string(line_no) + ": short row");
    g.alpha.emplace_back(vals[c_re], vals[c_im]);
    g.p.push_back(vals[c_p]);
    g.std_err.push_back(c_se >= 0 ? vals[c_se] : 0.0);
  }
  return g;
}

int run_compare(const std::string& sampled_path, const std::string& oracle_path,
                const std::string& out) {
  const Stopwatch timer;
  const GridFile sampled = read_grid_csv(sampled_path);
  const GridFile oracle = read_grid_csv(oracle_path);

  auto key = [](std::complex<double> a) {
    return std::pair<long long, long long>(std::llround(a.real() * 1e9),
                                           std::llround(a.imag() * 1e9));
  };
  std::map<std::pair<long long, long long>, std::size_t> index;
  for (std::size_t i = 0; i < oracle.alpha.size(); ++i) index[key(oracle.alpha[i])] = i;

  std::vector<std::string> missing;
  std::size_t n_joined = 0, n_within = 0;
  double max_abs_z = 0.0, sum_z = 0.0, sum_z2 = 0.0;
  std::vector<bool> oracle_used(oracle.alpha.size(), false);
  for (std::size_t i = 0; i < sampled.alpha.size(); ++i) {
    const auto it = index.find(key(sampled.alpha[i]));
    if (it == index.end()) {
      missing.push_back("(" + fmt17(sampled.alpha[i].real()) + ", " +
                        fmt17(sampled.alpha[i].imag()) + ") missing from oracle grid");
      continue;
    }
    oracle_used[it->second] = true;
    const double diff = sampled.p[i] - oracle.p[it->second];
    const double se = sampled.std_err[i];
    double z = 0.0;
    if (se > 0.0)
      z = diff / se;
    else
      z = (diff == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    ++n_joined;
    if (std::abs(z) <= 4.0) ++n_within;
    max_abs_z = std::max(max_abs_z, std::abs(z));
    sum_z += z;
    sum_z2 += z * z;
  }
  for (std::size_t i = 0; i < oracle.alpha.size(); ++i)
    if (!oracle_used[i])
      missing.push_back("(" + fmt17(oracle.alpha[i].real()) + ", " +
                        fmt17(oracle.alpha[i].imag()) + ") missing from sampled grid");

  if (!missing.empty()) {
    std::cerr << "compare: grids do not match; " << missing.size()
              << " unmatched points:\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, missing.size()); ++i)
      std::cerr << "  " << missing[i] << "\n";
    if (missing.size() > 10) std::cerr << "  ...\n";
    return 2;
  }

  json report;
  report["sampled"] = sampled_path;
  report["oracle"] = oracle_path;
  report["n_joined"] = n_joined;
  report["frac_within_4"] =
      n_joined ? static_cast<double>(n_within) / static_cast<double>(n_joined) : 1.0;
  report["max_abs_z"] = std::isfinite(max_abs_z) ? json(max_abs_z) : json("inf");
  report["mean_z"] = n_joined ? sum_z / static_cast<double>(n_joined) : 0.0;
  report["rms_z"] = n_joined ? std::sqrt(sum_z2 / static_cast<double>(n_joined)) : 0.0;
  write_text_atomic(out, report.dump(2) + "\n");
  write_manifest(out, "compare",
                 json{{"sampled", sampled_path}, {"oracle", oracle_path}, {"out", out}},
                 timer.seconds());
  std::cout << "wrote " << out << ": " << n_joined << " points joined, "
            << report["frac_within_4"].dump() << " within |z| <= 4, max |z| = "
            << report["max_abs_z"].dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_argv.emplace_back(argv[i]);

  CLI::App app{
      "nqprob: nonclassicality quasiprobabilities sampled directly from "
      "balanced-homodyne quadrature data"};
  app.require_subcommand(1);

  // simulate
  double vx = 1.0, vp = 1.0;
  std::size_t phases = 21, n_per_phase = 100000;
  std::uint64_t seed = 1;
  std::string out;
  auto* sim = app.add_subcommand("simulate", "Simulate Gaussian quadrature data");
  sim->add_option("--vx", vx, "variance of the x quadrature (at phase pi/2)")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--vp", vp, "variance of the p quadrature (at phase 0)")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--phases", phases, "number of equispaced phases in [0, pi)")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--n-per-phase", n_per_phase, "samples per phase")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--out", out, "output CSV path")->required();

  // shared estimate/scan flags
  std::string in_path;
  double width = 1.3;
  GridFlags grid_est, grid_scan, grid_orc;
  std::uint64_t dither_seed = 1;
  EstimateOptions opts;
  std::string widths_text = "0.7:2.0:0.1";

  auto* est = app.add_subcommand("estimate",
                                 "Estimate the quasiprobability on a phase-space grid");
  est->add_option("--in", in_path, "input dataset CSV")->required();
  est->add_option("--width", width, "filter width w")
      ->required()
      ->check(CLI::PositiveNumber);
  add_grid_flags(est, grid_est);
  est->add_option("--dither-seed", dither_seed, "phase-dither RNG seed");
  est->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
  est->add_flag("--fast-chi", opts.fast_chi,
                "use the validated dense kernel lookup (same 1e-6 accuracy gate)");
  est->add_option("--n-nodes", opts.n_nodes, "filter profile nodes");
  est->add_option("--n-coeff", opts.n_coeff, "kernel coefficients");
  est->add_option("--out", out, "output CSV path")->required();

  auto* scn = app.add_subcommand("scan", "Scan filter widths for the best significance");
  scn->add_option("--in", in_path, "input dataset CSV")->required();
  scn->add_option("--widths", widths_text, "width list 'a:b:step' or single 'w'");
  add_grid_flags(scn, grid_scan);
  scn->add_option("--dither-seed", dither_seed, "phase-dither RNG seed");
  scn->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
  scn->add_flag("--fast-chi", opts.fast_chi,
                "use the validated dense kernel lookup (same 1e-6 accuracy gate)");
  scn->add_option("--n-nodes", opts.n_nodes, "filter profile nodes");
  scn->add_option("--n-coeff", opts.n_coeff, "kernel coefficients");
  scn->add_option("--out", out, "output CSV path")->required();

  // oracle
  OracleConfig ocfg;
  std::size_t oracle_phases = 0;
  bool riemann = false;
  auto* orc = app.add_subcommand("oracle",
                                 "Analytic reference for Gaussian states by direct "
                                 "quadrature");
  orc->add_option("--vx", vx, "variance of the x quadrature (at phase pi/2)")
      ->required()
      ->check(CLI::PositiveNumber);
  orc->add_option("--vp", vp, "variance of the p quadrature (at phase 0)")
      ->required()
      ->check(CLI::PositiveNumber);
  orc->add_option("--width", width, "filter width w")
      ->required()
      ->check(CLI::PositiveNumber);
  add_grid_flags(orc, grid_orc);
  orc->add_option("--phases", oracle_phases,
                  "also emit the discrete-phase value and systematic error");
  orc->add_flag("--riemann", riemann,
                "also emit the plain Riemann phase sum (negative control)");
  orc->add_option("--b-max", ocfg.b_max, "radial cutoff (default 4w)");
  orc->add_option("--radial-nodes", ocfg.radial_nodes, "radial nodes (0 = auto)");
  orc->add_option("--angular-nodes", ocfg.angular_nodes,
                  "angular nodes per [0, pi) (0 = auto)");
  orc->add_option("--tolerance", ocfg.tolerance, "absolute quadrature tolerance");
  orc->add_option("--out", out, "output CSV path")->required();

  // kernel
  double xi_max = 20.0, xi_step = 0.01;
  std::string filter_out;
  std::size_t k_nodes = 2048, k_coeff = 256;
  auto* ker = app.add_subcommand("kernel", "Dump the sampling kernel (and filter) CSV");
  ker->add_option("--width", width, "filter width w")
      ->required()
      ->check(CLI::PositiveNumber);
  ker->add_option("--n-nodes", k_nodes, "filter profile nodes");
  ker->add_option("--n-coeff", k_coeff, "kernel coefficients");
  ker->add_option("--xi-max", xi_max, "maximum xi");
  ker->add_option("--xi-step", xi_step, "xi step")->check(CLI::PositiveNumber);
  ker->add_option("--out", out, "output CSV path")->required();
  ker->add_option("--filter-out", filter_out, "optional filter CSV path");

  // compare
  std::string sampled_path, oracle_path;
  auto* cmp = app.add_subcommand("compare", "Join a sampled grid against an oracle grid");
  cmp->add_option("--sampled", sampled_path, "sampled grid CSV")->required();
  cmp->add_option("--oracle", oracle_path, "oracle grid CSV")->required();
  cmp->add_option("--out", out, "output report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(vx, vp, phases, n_per_phase, seed, out);
    if (est->parsed())
      return run_estimate(in_path, width, grid_est, dither_seed, out, opts);
    if (scn->parsed())
      return run_scan(in_path, widths_text, grid_scan, dither_seed, out, opts);
    if (orc->parsed())
      return run_oracle(vx, vp, width, grid_orc, oracle_phases, riemann, out, ocfg);
    if (ker->parsed())
      return run_kernel(width, k_nodes, k_coeff, xi_max, xi_step, out, filter_out);
    if (cmp->parsed()) return run_compare(sampled_path, oracle_path, out);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericGateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
