#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fcar/estimate.hpp"
#include "fcar/function_space.hpp"
#include "fcar/lattice.hpp"

namespace fcar {

// Grid of Monte Carlo settings: every combination of decay exponent, lattice
// size and dependence value is run for `replicates` independent datasets.
struct BenchConfig {
  std::vector<double> b_values = {2.0};
  std::vector<std::pair<int, int>> lattice_sizes = {{10, 10}};
  std::vector<double> rho_values = {0.0, 0.3, 0.6, 0.9};
  int replicates = 100;
  std::uint64_t base_seed = 20240214;
  int grid_size = 50;       // uniform grid on [0, 1]
  int n_components = 15;    // KL truncation of the simulated kernel
  int burn_in = 200;        // Gibbs sweeps per replicate
  double nominal_level = 0.05;
  int parallelism = 1;      // worker threads; <= 0 means hardware concurrency
  FitConfig fit;
};

// One cell of the settings grid.
struct BenchSetting {
  double b;
  double rho;
  int rows;
  int cols;
  int n() const { return rows * cols; }
};

// Scalar record of a single replicate. Only scalars are kept -- never the
// estimated kernels -- so memory stays flat in the number of replicates.
// A replicate counts as failed (ok = false) when the fit throws, fails to
// converge, or pins at the admissible boundary; failed replicates carry a
// note and are excluded from every aggregate.
struct ReplicateOutcome {
  bool ok = false;
  std::string note;            // failure reason when !ok
  double sq_err_hs_fcar = 0;   // ||gamma_hat - gamma||_HS^2
  double sq_err_hs_naive = 0;  // same for the naive estimator
  double sq_err_rho = 0;
  double sq_err_alpha = 0;     // ||alpha_hat - alpha||^2
  bool covered = false;        // CI contains the true dependence value
  bool rejected_fcar = false;
  bool rejected_moran = false;
  int iterations = 0;
  double fit_ms = 0;
};

// Aggregated metrics for one setting; means are over the ok replicates.
struct ReportRow {
  double b;
  double rho;
  int n;
  int replicates;
  int failures;
  double mse_hs_fcar;
  double mse_hs_naive;
  double mse_rho;
  double mse_alpha;
  double coverage;         // CI coverage rate
  double rejection_fcar;   // dependence-test rejection rate
  double rejection_moran;  // Moran's I rejection rate
  double mean_iterations;
  double mean_fit_ms;
};

// The true conditional covariance used by the simulator: the trigonometric
// KL kernel with eigenvalues j^{-b/2}, j = 1..n_components.
CovOperator kl_truth_covariance(const TimeGridPtr& grid, double b,
                                int n_components);

// Settings in report order: decay exponent outermost, then lattice size,
// then dependence value.
std::vector<BenchSetting> enumerate_settings(const BenchConfig& config);

// All replicates of one setting. The replicate with index r draws its seed
// as derive_key(derive_key(base_seed, setting_index), r), a pure function of
// the indices: results are independent of the parallelism degree, and the
// first m replicates of a longer run coincide with a run of m.
std::vector<ReplicateOutcome> run_setting(const BenchConfig& config,
                                          const BenchSetting& setting,
                                          std::size_t setting_index);

// Folds replicate outcomes into a report row (deterministic, in index order).
ReportRow compute_metrics(const std::vector<ReplicateOutcome>& outcomes,
                          const BenchSetting& setting);

// Runs the whole grid; `on_row` (optional) observes each finished row.
std::vector<ReportRow> run_monte_carlo(
    const BenchConfig& config,
    const std::function<void(const ReportRow&)>& on_row = {});

enum class ReportFormat { kCsv, kJson, kPlotData };

// Serializes rows: csv (one row per setting), json (array of objects), or
// plotdata (power-curve long format: b, rho, n, method, rejection_rate --
// one line per setting and test method).
std::string format_report(const std::vector<ReportRow>& rows,
                          ReportFormat format);

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& path);

}  // namespace fcar
