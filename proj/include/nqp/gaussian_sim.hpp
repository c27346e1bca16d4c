#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace nqp {

// Zero-mean Gaussian state given by its two principal quadrature variances,
// vacuum-normalized (V_vac = 1).  For squeezed vacuum v_x < 1 < v_p; physical
// states satisfy v_x * v_p >= 1 (violations are warned about, not rejected,
// so stress tests can use them).
struct GaussianStateSpec {
  double v_x = 1.0;
  double v_p = 1.0;
  GaussianStateSpec() = default;
  GaussianStateSpec(double vx, double vp);
  bool physical() const { return v_x * v_p >= 1.0 - 1e-12; }
};

// Homodyne marginal variance at local-oscillator phase phi:
//   V(phi) = v_x sin^2(phi) + v_p cos^2(phi).
// The phase origin is chosen so the squeezed (v_x) quadrature sits at
// phi = pi/2, which places the quasiprobability minimum of a squeezed state
// on the Im(alpha) axis.  Pi-periodic, V > 0.
double quadrature_variance(const GaussianStateSpec& state, double phi);

struct PhaseGrid {
  std::vector<double> phases;  // strictly increasing, all in [0, pi)
  bool equispaced = false;     // phases[k] == k*pi/N within 1e-12

  static PhaseGrid regular(std::size_t n_phases);           // k*pi/N
  static PhaseGrid from_phases(std::vector<double> phases);  // validates
  std::size_t size() const { return phases.size(); }
};

enum class DataSource { simulated, external };

// Phase-tagged quadrature samples in acquisition order.
struct QuadratureDataset {
  PhaseGrid grid;
  std::vector<std::int32_t> phase_index;  // per sample
  std::vector<double> x;                  // per sample
  // Per-sample ordinal among the samples of the same phase, in dataset order.
  // This is the counter that keys the dither stream, so estimates do not
  // depend on how samples of different phases are interleaved on disk.
  std::vector<std::uint32_t> ordinal;
  std::vector<std::uint64_t> per_phase_counts;
  std::optional<std::uint64_t> seed;
  std::optional<GaussianStateSpec> state;
  DataSource source = DataSource::simulated;

  std::size_t size() const { return x.size(); }
  void finalize();  // validates phase indices, fills ordinal/per_phase_counts
};

QuadratureDataset simulate_quadratures(const GaussianStateSpec& state,
                                       const PhaseGrid& grid,
                                       std::size_t n_per_phase,
                                       std::uint64_t seed);

// CSV with header `phi_rad,x` plus a JSON sidecar next to it (see
// sidecar_path) holding the phase grid, per-phase counts, seed and state.
void save_dataset(const QuadratureDataset& ds, const std::filesystem::path& csv_path);
// Loads a dataset; if the sidecar is missing the phase grid is inferred from
// the distinct phi values in the CSV and the source is marked external.
QuadratureDataset load_dataset(const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

// FNV-1a over the numeric payload (phases, then per-sample records).
std::uint64_t dataset_hash(const QuadratureDataset& ds);

}  // namespace nqp
