#include "nqp/gaussian_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nqp/io.hpp"
#include "nqp/rng.hpp"

namespace nqp {

using json = nlohmann::json;

GaussianStateSpec::GaussianStateSpec(double vx, double vp) : v_x(vx), v_p(vp) {
  if (!(vx > 0.0) || !(vp > 0.0))
    throw std::invalid_argument("GaussianStateSpec: variances must be positive");
  if (!physical())
    std::cerr << "warning: unphysical state, v_x*v_p = " << vx * vp << " < 1\n";
}

double quadrature_variance(const GaussianStateSpec& state, double phi) {
  // v_x sin^2 + v_p cos^2, written so isotropic states are exactly constant.
  const double s = std::sin(phi);
  return state.v_p + (state.v_x - state.v_p) * s * s;
}

PhaseGrid PhaseGrid::regular(std::size_t n_phases) {
  if (n_phases == 0) throw std::invalid_argument("PhaseGrid: need at least one phase");
  PhaseGrid g;
  g.phases.resize(n_phases);
  for (std::size_t k = 0; k < n_phases; ++k)
    g.phases[k] = k * std::numbers::pi / static_cast<double>(n_phases);
  g.equispaced = true;
  return g;
}

PhaseGrid PhaseGrid::from_phases(std::vector<double> phases) {
  if (phases.empty()) throw std::invalid_argument("PhaseGrid: need at least one phase");
  for (std::size_t k = 0; k < phases.size(); ++k) {
    if (!(phases[k] >= 0.0) || !(phases[k] < std::numbers::pi))
      throw std::invalid_argument("PhaseGrid: phase out of [0, pi)");
    if (k > 0 && !(phases[k] > phases[k - 1]))
      throw std::invalid_argument("PhaseGrid: phases must be strictly increasing");
  }
  PhaseGrid g;
  g.phases = std::move(phases);
  const std::size_t n = g.phases.size();
  g.equispaced = true;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(g.phases[k] - k * std::numbers::pi / static_cast<double>(n)) > 1e-12) {
      g.equispaced = false;
      break;
    }
  return g;
}

void QuadratureDataset::finalize() {
  const std::size_t n = x.size();
  if (phase_index.size() != n)
    throw std::invalid_argument("QuadratureDataset: column size mismatch");
  per_phase_counts.assign(grid.size(), 0);
  ordinal.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = phase_index[i];
    if (k < 0 || static_cast<std::size_t>(k) >= grid.size())
      throw std::invalid_argument("QuadratureDataset: phase index out of range");
    ordinal[i] = static_cast<std::uint32_t>(per_phase_counts[k]++);
  }
}

QuadratureDataset simulate_quadratures(const GaussianStateSpec& state,
                                       const PhaseGrid& grid,
                                       std::size_t n_per_phase,
                                       std::uint64_t seed) {
  if (n_per_phase == 0)
    throw std::invalid_argument("simulate_quadratures: n_per_phase must be >= 1");
  QuadratureDataset ds;
  ds.grid = grid;
  ds.seed = seed;
  ds.state = state;
  ds.source = DataSource::simulated;
  const std::size_t nph = grid.size();
  ds.phase_index.resize(nph * n_per_phase);
  ds.x.resize(nph * n_per_phase);
  for (std::size_t k = 0; k < nph; ++k) {
    const double sd = std::sqrt(quadrature_variance(state, grid.phases[k]));
    double* out = ds.x.data() + k * n_per_phase;
    for (std::size_t i = 0; i < n_per_phase; ++i) out[i] = sd * normal(seed, k, i);
    std::fill_n(ds.phase_index.begin() + k * n_per_phase, n_per_phase,
                static_cast<std::int32_t>(k));
  }
  ds.finalize();
  return ds;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension();
  p += ".meta.json";
  return p;
}

void save_dataset(const QuadratureDataset& ds, const std::filesystem::path& csv_path) {
  // CSV via temp+rename; rows stream straight to the file to keep memory flat.
  auto tmp = csv_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << "phi_rad,x\n";
    char buf[96];
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double phi = ds.grid.phases[ds.phase_index[i]];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", phi, ds.x[i]);
      out << buf;
    }
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, csv_path, ec);
  if (ec) throw IoError("rename failed: " + csv_path.string() + ": " + ec.message());

  json meta;
  meta["n_phases"] = ds.grid.size();
  meta["phases"] = ds.grid.phases;
  meta["per_phase_counts"] = ds.per_phase_counts;
  if (ds.seed) meta["seed"] = *ds.seed; else meta["seed"] = nullptr;
  if (ds.state)
    meta["state"] = {{"v_x", ds.state->v_x}, {"v_p", ds.state->v_p}};
  else
    meta["state"] = nullptr;
  meta["source"] = ds.source == DataSource::simulated ? "simulated" : "external";
  write_text_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
}

namespace {

int find_phase(const std::vector<double>& phases, double phi) {
  // Grids are small; tolerance matches the sidecar contract.
  for (std::size_t k = 0; k < phases.size(); ++k)
    if (std::abs(phases[k] - phi) <= 1e-12) return static_cast<int>(k);
  return -1;
}

}  // namespace

QuadratureDataset load_dataset(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + csv_path.string());

  std::string line;
  if (!std::getline(in, line)) throw IoError(csv_path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "phi_rad,x")
    throw IoError(csv_path.string() + ": malformed header '" + line +
                  "' (expected 'phi_rad,x')");

  std::vector<double> phis, xs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const double phi = std::strtod(s, &end);
    if (end == s || *end != ',')
      throw IoError(csv_path.string() + ":" + std::to_string(lineno) +
                    ": non-numeric row");
    const char* s2 = end + 1;
    const double xv = std::strtod(s2, &end);
    if (end == s2 || *end != '\0')
      throw IoError(csv_path.string() + ":" + std::to_string(lineno) +
                    ": non-numeric row");
    if (!(phi >= 0.0) || !(phi < std::numbers::pi))
      throw IoError(csv_path.string() + ":" + std::to_string(lineno) +
                    ": phase " + fmt17(phi) + " out of [0, pi)");
    phis.push_back(phi);
    xs.push_back(xv);
  }

  QuadratureDataset ds;
  const auto meta_path = sidecar_path(csv_path);
  if (std::filesystem::exists(meta_path)) {
    json meta;
    try {
      meta = json::parse(read_text(meta_path));
    } catch (const json::exception& e) {
      throw IoError(meta_path.string() + ": bad sidecar: " + e.what());
    }
    std::vector<double> phases = meta.at("phases").get<std::vector<double>>();
    ds.grid = PhaseGrid::from_phases(std::move(phases));
    if (meta.contains("seed") && !meta["seed"].is_null())
      ds.seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("state") && !meta["state"].is_null())
      ds.state = GaussianStateSpec(meta["state"].at("v_x").get<double>(),
                                   meta["state"].at("v_p").get<double>());
    if (meta.value("source", "simulated") == std::string("external"))
      ds.source = DataSource::external;
  } else {
    // No sidecar (e.g. externally recorded data): infer the grid.
    std::vector<double> uniq = phis;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
               uniq.end());
    if (uniq.empty())
      throw IoError(csv_path.string() + ": no samples and no sidecar to define a grid");
    ds.grid = PhaseGrid::from_phases(std::move(uniq));
    ds.source = DataSource::external;
  }

  ds.phase_index.resize(phis.size());
  ds.x = std::move(xs);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const int k = find_phase(ds.grid.phases, phis[i]);
    if (k < 0)
      throw IoError(csv_path.string() + ":" + std::to_string(i + 2) + ": phase " +
                    fmt17(phis[i]) + " does not match the sidecar grid (tol 1e-12)");
    ds.phase_index[i] = k;
  }
  ds.finalize();
  return ds;
}

std::uint64_t dataset_hash(const QuadratureDataset& ds) {
  std::uint64_t h = fnv1a64(ds.grid.phases.data(), ds.grid.phases.size() * sizeof(double));
  h = fnv1a64(ds.phase_index.data(), ds.phase_index.size() * sizeof(std::int32_t), h);
  h = fnv1a64(ds.x.data(), ds.x.size() * sizeof(double), h);
  return h;
}

}  // namespace nqp
