#include "fcar/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fcar/inference.hpp"
#include "fcar/rng.hpp"
#include "fcar/simulate.hpp"

namespace fcar {

namespace {

int resolve_parallelism(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void validate_config(const BenchConfig& config) {
  if (config.replicates < 1)
    throw ValidationError("bench needs at least one replicate");
  if (config.b_values.empty() || config.rho_values.empty() ||
      config.lattice_sizes.empty())
    throw ValidationError("bench settings grid is empty");
  if (config.grid_size < 2)
    throw ValidationError("bench grid needs at least 2 points");
  if (config.n_components < 1 || config.burn_in < 1)
    throw ValidationError("invalid simulation protocol settings");
  if (!(config.nominal_level > 0.0) || !(config.nominal_level < 1.0))
    throw ValidationError("nominal level must lie in (0, 1)");
  for (double b : config.b_values)
    if (!(b > 0.0)) throw ValidationError("decay exponent b must be positive");
  // Every dependence value must be admissible on every lattice.
  for (const auto& [rows, cols] : config.lattice_sizes) {
    const NeighborhoodGraph graph = build_torus(rows, cols);
    const Interval interval =
        admissible_interval(graph, Variant::kNested);
    for (double rho : config.rho_values)
      if (!(rho > interval.lo && rho < interval.hi)) {
        std::ostringstream os;
        os << "dependence " << rho << " not admissible on " << rows << "x"
           << cols << " torus";
        throw ValidationError(os.str());
      }
  }
}

ReplicateOutcome run_replicate(const BenchConfig& config,
                               const BenchSetting& setting,
                               const NeighborhoodGraph& graph,
                               const CovOperator& truth,
                               const TimeGridPtr& grid,
                               std::uint64_t setting_key, int replicate) {
  ReplicateOutcome out;
  try {
    SimConfig sim;
    sim.variant = Variant::kNested;
    sim.dependence = setting.rho;
    sim.decay_b = setting.b;
    sim.n_components = config.n_components;
    sim.burn_in = config.burn_in;
    sim.seed = RngStream::derive_key(setting_key,
                                     static_cast<std::uint64_t>(replicate));

    const Curve alpha_true(Eigen::VectorXd::Zero(grid->size()), grid);
    const FunctionalDataset data =
        gibbs_sample_dataset(sim, graph, alpha_true, grid);

    const CovOperator naive = marginal_covariance(data);
    out.sq_err_hs_naive = std::pow(hs_distance(naive, truth), 2);

    const auto t0 = std::chrono::steady_clock::now();
    const FitResult fit =
        profile_fit(data, graph, Variant::kNested, config.fit);
    const auto t1 = std::chrono::steady_clock::now();
    out.fit_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.iterations = fit.iterations;

    if (!fit.converged) {
      out.note = "fit did not converge";
      return out;
    }
    if (fit.boundary) {
      out.note = "dependence estimate pinned at the admissible boundary";
      return out;
    }

    out.sq_err_hs_fcar = std::pow(hs_distance(fit.gamma_hat, truth), 2);
    out.sq_err_rho = std::pow(fit.dependence_hat - setting.rho, 2);
    const Curve diff(fit.alpha_hat.values() - alpha_true.values(), grid);
    out.sq_err_alpha = std::pow(norm(diff), 2);

    const ConfidenceInterval ci =
        confidence_interval(fit, 1.0 - config.nominal_level);
    out.covered = ci.lower <= setting.rho && setting.rho <= ci.upper;
    out.rejected_fcar = dependence_test(fit, config.nominal_level).reject;
    out.rejected_moran =
        morans_i_test(time_averages(data), graph, config.nominal_level)
            .reject;
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.note = e.what();
  }
  return out;
}

void append_csv_value(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

CovOperator kl_truth_covariance(const TimeGridPtr& grid, double b,
                                int n_components) {
  if (!grid) throw ValidationError("null time grid");
  const Eigen::MatrixXd basis = trig_basis(*grid, n_components);
  const Eigen::VectorXd sd = kl_std_devs(b, n_components);
  const Eigen::VectorXd lambda = sd.cwiseAbs2();
  Eigen::MatrixXd kernel = basis * lambda.asDiagonal() * basis.transpose();
  kernel = ((kernel + kernel.transpose()) / 2.0).eval();
  return CovOperator(std::move(kernel), grid);
}

std::vector<BenchSetting> enumerate_settings(const BenchConfig& config) {
  std::vector<BenchSetting> settings;
  for (double b : config.b_values)
    for (const auto& [rows, cols] : config.lattice_sizes)
      for (double rho : config.rho_values)
        settings.push_back({b, rho, rows, cols});
  return settings;
}

std::vector<ReplicateOutcome> run_setting(const BenchConfig& config,
                                          const BenchSetting& setting,
                                          std::size_t setting_index) {
  const NeighborhoodGraph graph = build_torus(setting.rows, setting.cols);
  const TimeGridPtr grid =
      TimeGrid::uniform(0.0, 1.0, config.grid_size);
  const CovOperator truth =
      kl_truth_covariance(grid, setting.b, config.n_components);
  const std::uint64_t setting_key =
      RngStream::derive_key(config.base_seed, setting_index);

  const int m = config.replicates;
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(m));
  const int workers = std::min(resolve_parallelism(config.parallelism), m);

  // Replicates are claimed through an atomic counter and written into their
  // own slot: results are a pure function of the indices, so the outcome
  // vector is identical for every parallelism degree.
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= m) return;
      outcomes[static_cast<std::size_t>(r)] = run_replicate(
          config, setting, graph, truth, grid, setting_key, r);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
  }
  return outcomes;
}

ReportRow compute_metrics(const std::vector<ReplicateOutcome>& outcomes,
                          const BenchSetting& setting) {
  ReportRow row{};
  row.b = setting.b;
  row.rho = setting.rho;
  row.n = setting.n();
  row.replicates = static_cast<int>(outcomes.size());
  double sum_fcar = 0, sum_naive = 0, sum_rho = 0, sum_alpha = 0;
  double sum_cov = 0, sum_rej_f = 0, sum_rej_m = 0, sum_iter = 0, sum_ms = 0;
  int ok = 0;
  for (const ReplicateOutcome& out : outcomes) {
    if (!out.ok) continue;
    ++ok;
    sum_fcar += out.sq_err_hs_fcar;
    sum_naive += out.sq_err_hs_naive;
    sum_rho += out.sq_err_rho;
    sum_alpha += out.sq_err_alpha;
    sum_cov += out.covered ? 1.0 : 0.0;
    sum_rej_f += out.rejected_fcar ? 1.0 : 0.0;
    sum_rej_m += out.rejected_moran ? 1.0 : 0.0;
    sum_iter += out.iterations;
    sum_ms += out.fit_ms;
  }
  row.failures = row.replicates - ok;
  if (ok == 0)
    throw NumericError("benchmark cell has no successful replicates");
  const double den = static_cast<double>(ok);
  row.mse_hs_fcar = sum_fcar / den;
  row.mse_hs_naive = sum_naive / den;
  row.mse_rho = sum_rho / den;
  row.mse_alpha = sum_alpha / den;
  row.coverage = sum_cov / den;
  row.rejection_fcar = sum_rej_f / den;
  row.rejection_moran = sum_rej_m / den;
  row.mean_iterations = sum_iter / den;
  row.mean_fit_ms = sum_ms / den;
  return row;
}

std::vector<ReportRow> run_monte_carlo(
    const BenchConfig& config,
    const std::function<void(const ReportRow&)>& on_row) {
  validate_config(config);
  const std::vector<BenchSetting> settings = enumerate_settings(config);
  std::vector<ReportRow> rows;
  rows.reserve(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const std::vector<ReplicateOutcome> outcomes =
        run_setting(config, settings[s], s);
    rows.push_back(compute_metrics(outcomes, settings[s]));
    if (on_row) on_row(rows.back());
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows,
                          ReportFormat format) {
  if (rows.empty()) throw ValidationError("no report rows to emit");
  if (format == ReportFormat::kCsv) {
    std::string out =
        "b,rho,n,replicates,failures,mse_hs_fcar,mse_hs_naive,mse_rho,"
        "mse_alpha,coverage,rejection_fcar,rejection_moran,mean_iterations,"
        "mean_fit_ms\n";
    for (const ReportRow& r : rows) {
      std::string line;
      append_csv_value(line, r.b);
      line += ',';
      append_csv_value(line, r.rho);
      line += ',' + std::to_string(r.n) + ',' + std::to_string(r.replicates) +
              ',' + std::to_string(r.failures) + ',';
      for (double v : {r.mse_hs_fcar, r.mse_hs_naive, r.mse_rho, r.mse_alpha,
                       r.coverage, r.rejection_fcar, r.rejection_moran,
                       r.mean_iterations, r.mean_fit_ms}) {
        append_csv_value(line, v);
        line += ',';
      }
      line.back() = '\n';
      out += line;
    }
    return out;
  }
  if (format == ReportFormat::kJson) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    nlohmann::json arr = nlohmann::json::array();
    for (const ReportRow& r : rows) {
      arr.push_back({{"b", r.b},
                     {"rho", r.rho},
                     {"n", r.n},
                     {"replicates", r.replicates},
                     {"failures", r.failures},
                     {"mse_hs_fcar", r.mse_hs_fcar},
                     {"mse_hs_naive", r.mse_hs_naive},
                     {"mse_rho", r.mse_rho},
                     {"mse_alpha", r.mse_alpha},
                     {"coverage", r.coverage},
                     {"rejection_fcar", r.rejection_fcar},
                     {"rejection_moran", r.rejection_moran},
                     {"mean_iterations", r.mean_iterations},
                     {"mean_fit_ms", r.mean_fit_ms}});
    }
    doc["rows"] = std::move(arr);
    return doc.dump(2) + "\n";
  }
  // Plot data for power curves: one record per (setting, method).
  std::string out = "b,rho,n,method,rejection_rate\n";
  for (const ReportRow& r : rows) {
    for (const char* method : {"fcar", "moran"}) {
      std::string line;
      append_csv_value(line, r.b);
      line += ',';
      append_csv_value(line, r.rho);
      line += ',' + std::to_string(r.n) + ',' + method + ',';
      append_csv_value(line, method[0] == 'f' ? r.rejection_fcar
                                              : r.rejection_moran);
      line += '\n';
      out += line;
    }
  }
  return out;
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& path) {
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot open for writing: " + path);
  file << format_report(rows, format);
  if (!file.good()) throw ValidationError("write failed: " + path);
}

}  // namespace fcar
