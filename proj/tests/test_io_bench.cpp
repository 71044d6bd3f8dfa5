#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "fcar/bench.hpp"
#include "fcar/io.hpp"
#include "fcar/rng.hpp"
#include "fcar/simulate.hpp"

using namespace fcar;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "fcar_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string scratch(const std::string& name) {
  return (scratch_dir() / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

FunctionalDataset small_dataset(std::uint64_t seed) {
  const TimeGridPtr grid = TimeGrid::uniform(0.0, 1.0, 7);
  RngStream rng = RngStream::derive(seed, 0);
  Eigen::MatrixXd m(3, 7);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index t = 0; t < 7; ++t) m(i, t) = rng.normal();
  return FunctionalDataset(m, grid, {"alpha", "beta", "gamma"});
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("dataset round trip preserves every bit") {
  const FunctionalDataset data = small_dataset(1);
  const std::string path = scratch("roundtrip.csv");
  write_dataset(data, path);
  CHECK(fs::exists(sidecar_path(path)));
  const FunctionalDataset back = read_dataset(path);
  CHECK(back.matrix() == data.matrix());
  CHECK(back.location_ids() == data.location_ids());
  CHECK(back.grid().same_as(data.grid()));
}

TEST_CASE("sidecar path convention") {
  CHECK(sidecar_path("/tmp/x/data.csv") == "/tmp/x/data.csv.meta.json");
}

TEST_CASE("sidecar extras are merged into the metadata document") {
  const FunctionalDataset data = small_dataset(2);
  const std::string path = scratch("extras.csv");
  nlohmann::json extra;
  extra["note"] = "hello";
  write_dataset(data, path, &extra);
  const nlohmann::json meta = read_json_file(sidecar_path(path));
  CHECK(meta.at("note") == "hello");
  CHECK(meta.at("schema_version") == kSchemaVersion);
  CHECK(meta.at("T") == 7);
  CHECK(meta.at("t_min") == 0.0);
  CHECK(meta.at("t_max") == 1.0);
}

TEST_CASE("dataset reading validates structure") {
  const std::string path = scratch("bad.csv");
  const std::string meta = sidecar_path(path);

  // Missing sidecar.
  write_text(path, "location_id,t_0,t_1\na,1,2\n");
  if (fs::exists(meta)) fs::remove(meta);
  CHECK_THROWS_AS(read_dataset(path), ValidationError);

  write_text(meta,
             "{\"schema_version\":1,\"t_min\":0,\"t_max\":1,\"T\":2}");
  CHECK_NOTHROW(read_dataset(path));

  // Wrong header.
  write_text(path, "id,t_0,t_1\na,1,2\n");
  CHECK_THROWS_AS(read_dataset(path), ValidationError);

  // Ragged row.
  write_text(path, "location_id,t_0,t_1\na,1\n");
  CHECK_THROWS_AS(read_dataset(path), ValidationError);

  // Non-finite value.
  write_text(path, "location_id,t_0,t_1\na,1,nan\n");
  CHECK_THROWS_AS(read_dataset(path), ValidationError);

  // Sidecar grid length disagrees with the rows.
  write_text(path, "location_id,t_0,t_1,t_2\na,1,2,3\n");
  CHECK_THROWS_AS(read_dataset(path), ValidationError);

  // Unsupported schema version.
  write_text(path, "location_id,t_0,t_1\na,1,2\n");
  write_text(meta,
             "{\"schema_version\":99,\"t_min\":0,\"t_max\":1,\"T\":2}");
  CHECK_THROWS_AS(read_dataset(path), ValidationError);

  CHECK_THROWS_AS(read_dataset(scratch("does_not_exist.csv")),
                  ValidationError);
}

TEST_CASE("edge list round trip") {
  const NeighborhoodGraph g = build_torus(3, 4);
  const std::string path = scratch("edges.csv");
  write_edge_list(g, path);
  const NeighborhoodGraph back = read_edge_list(path, g.location_ids());
  REQUIRE(back.size() == g.size());
  CHECK(back.edges() == g.edges());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    CHECK(back.neighbors(i) == g.neighbors(i));
}

TEST_CASE("edge list reading validates ids and header") {
  const std::string path = scratch("edges_bad.csv");
  write_text(path, "src,dst\na,b\n");
  CHECK_THROWS_AS(read_edge_list(path, {"a", "c"}), ValidationError);
  write_text(path, "from,to\na,b\n");
  CHECK_THROWS_AS(read_edge_list(path, {"a", "b"}), ValidationError);
  write_text(path, "src,dst\na,a\n");
  CHECK_THROWS_AS(read_edge_list(path, {"a", "b"}), ValidationError);
}

TEST_CASE("kernel csv round trip") {
  const TimeGridPtr grid = TimeGrid::uniform(0.0, 1.0, 6);
  RngStream rng = RngStream::derive(3, 0);
  Eigen::MatrixXd k(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = i; j < 6; ++j) {
      k(i, j) = rng.normal();
      k(j, i) = k(i, j);
    }
  const std::string path = scratch("kernel.csv");
  write_kernel_csv(CovOperator(k, grid), path);
  const Eigen::MatrixXd back = read_matrix_csv(path);
  CHECK(back == k);
}

TEST_CASE("model documents round trip") {
  const TimeGridPtr grid = TimeGrid::uniform(0.0, 1.0, 10);
  const auto graph = std::make_shared<const NeighborhoodGraph>(
      build_from_edge_list(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}));
  const Eigen::MatrixXd basis = trig_basis(*grid, 3);
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(10, 10);
  for (int j = 0; j < 3; ++j)
    kernel += std::pow(j + 1.0, -1.0) * basis.col(j) * basis.col(j).transpose();
  kernel = ((kernel + kernel.transpose()) / 2.0).eval();
  const FcarModel model(graph, Variant::kNested, 0.37,
                        Curve(Eigen::VectorXd::LinSpaced(10, 0.0, 1.0), grid),
                        CovOperator(kernel, grid));

  const nlohmann::json doc = model_to_json(model);
  const FcarModel back = model_from_json(doc);
  CHECK(back.dependence() == model.dependence());
  CHECK(back.variant() == model.variant());
  CHECK(back.alpha().values() == model.alpha().values());
  CHECK(back.gamma().kernel() == model.gamma().kernel());
  CHECK(back.graph().edges() == model.graph().edges());
}

TEST_CASE("graph documents carry either torus dims or explicit edges") {
  const nlohmann::json torus_doc = graph_to_json(build_torus(3, 3));
  CHECK(torus_doc.contains("torus"));
  const NeighborhoodGraph torus_back = graph_from_json(torus_doc);
  CHECK(torus_back.size() == 9);
  CHECK(torus_back.torus_dims().has_value());

  const NeighborhoodGraph irregular = build_from_edge_list(3, {{0, 1}, {1, 2}});
  const nlohmann::json edge_doc = graph_to_json(irregular);
  CHECK(edge_doc.contains("edges"));
  const NeighborhoodGraph edge_back = graph_from_json(edge_doc);
  CHECK(edge_back.edges() == irregular.edges());
  CHECK(edge_back.location_ids() == irregular.location_ids());
}

TEST_CASE("simulate jobs parse with defaults") {
  const std::string path = scratch("sim.json");
  write_text(path, R"({
    "schema_version": 1,
    "dependence": 0.6,
    "seed": 42,
    "graph": {"torus": [4, 5]}
  })");
  const SimJob job = load_sim_job(path);
  CHECK(job.config.dependence == 0.6);
  CHECK(job.config.seed == 42);
  CHECK(job.config.variant == Variant::kNested);
  CHECK(job.config.decay_b == 2.0);
  CHECK(job.config.n_components == 15);
  CHECK(job.config.burn_in == 200);
  CHECK(job.graph.size() == 20);
  CHECK(job.grid->size() == 50);
  CHECK(job.echo.at("variant") == "nested");

  write_text(path, R"({"graph": {"torus": [3, 3]}})");
  CHECK_THROWS_AS(load_sim_job(path), ValidationError);  // no dependence

  write_text(path, R"({"dependence": 0.1, "variant": "weird",
                       "graph": {"torus": [3, 3]}})");
  CHECK_THROWS_AS(load_sim_job(path), ValidationError);

  write_text(path, R"({"schema_version": 2, "dependence": 0.1,
                       "graph": {"torus": [3, 3]}})");
  CHECK_THROWS_AS(load_sim_job(path), ValidationError);

  write_text(path, "{not json");
  CHECK_THROWS_AS(load_sim_job(path), ValidationError);
}

TEST_CASE("fit jobs parse with defaults") {
  const FitJob empty = load_fit_job("");
  CHECK(empty.variant == Variant::kNested);
  CHECK(empty.config.fve_threshold == 0.95);
  CHECK(empty.config.tau1 == 1e-4);
  CHECK(empty.config.tau2 == 1e-3);
  CHECK(empty.config.max_iterations == 50);

  const std::string path = scratch("fit.json");
  write_text(path, R"({
    "variant": "general",
    "fve_threshold": 0.9,
    "max_iterations": 10,
    "initial_dependence": 0.05
  })");
  const FitJob job = load_fit_job(path);
  CHECK(job.variant == Variant::kGeneral);
  CHECK(job.config.fve_threshold == 0.9);
  CHECK(job.config.max_iterations == 10);
  CHECK(job.config.initial_dependence == 0.05);
  CHECK(job.config.tau2 == 1e-3);
}

TEST_CASE("bench configs parse with overrides") {
  const std::string path = scratch("bench.json");
  write_text(path, R"({
    "schema_version": 1,
    "b_values": [2.0, 4.0],
    "lattice_sizes": [[3, 3], [3, 4]],
    "rho_values": [0.0, 0.5],
    "replicates": 7,
    "base_seed": 99,
    "grid_size": 21,
    "n_components": 5,
    "burn_in": 30,
    "nominal_level": 0.1,
    "parallelism": 2,
    "fit": {"fve_threshold": 0.9}
  })");
  const BenchConfig config = load_bench_config(path);
  CHECK(config.b_values == std::vector<double>{2.0, 4.0});
  REQUIRE(config.lattice_sizes.size() == 2);
  CHECK(config.lattice_sizes[1] == std::pair<int, int>{3, 4});
  CHECK(config.rho_values == std::vector<double>{0.0, 0.5});
  CHECK(config.replicates == 7);
  CHECK(config.base_seed == 99);
  CHECK(config.grid_size == 21);
  CHECK(config.n_components == 5);
  CHECK(config.burn_in == 30);
  CHECK(config.nominal_level == 0.1);
  CHECK(config.parallelism == 2);
  CHECK(config.fit.fve_threshold == 0.9);
}

TEST_CASE("result documents expose the expected keys") {
  const TimeGridPtr grid = TimeGrid::uniform(0.0, 1.0, 8);
  const NeighborhoodGraph g = build_torus(3, 3);
  SimConfig sim;
  sim.dependence = 0.4;
  sim.burn_in = 40;
  sim.seed = 8;
  const Curve alpha(Eigen::VectorXd::Zero(8), grid);
  const FunctionalDataset data = gibbs_sample_dataset(sim, g, alpha, grid);
  const FitResult fit = profile_fit(data, g, Variant::kNested);
  const nlohmann::json doc = fit_result_to_json(fit);
  for (const char* key :
       {"schema_version", "variant", "dependence_hat", "curvature", "p",
        "iterations", "converged", "boundary", "n", "interval", "alpha_hat",
        "trace"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc.at("dependence_hat") == fit.dependence_hat);
  CHECK(doc.at("trace").size() == fit.trace.size());

  const TestReport report = dependence_test(fit, 0.05);
  const nlohmann::json rdoc = test_report_to_json(report);
  for (const char* key : {"method", "statistic", "p_value", "estimate",
                          "standard_error", "nominal_level", "reject"}) {
    CHECK(rdoc.contains(key));
  }
  CHECK(rdoc.at("method") == "fcar");
}

}  // TEST_SUITE

TEST_SUITE("bench") {

TEST_CASE("truth kernel has the advertised spectrum") {
  const TimeGridPtr grid = TimeGrid::uniform(0.0, 1.0, 50);
  const CovOperator truth = kl_truth_covariance(grid, 2.0, 5);
  const EigenSystem eig = spectral_decompose(truth);
  for (int j = 0; j < 5; ++j)
    CHECK(eig.values()(j) ==
          doctest::Approx(std::pow(j + 1.0, -1.0)).epsilon(1e-10));
  CHECK(eig.values().tail(45).cwiseAbs().maxCoeff() < 1e-12);
  double expected_trace = 0.0;
  for (int j = 1; j <= 5; ++j) expected_trace += 1.0 / j;
  CHECK(truth.trace() == doctest::Approx(expected_trace).epsilon(1e-12));
}

TEST_CASE("settings enumerate in report order") {
  BenchConfig config;
  config.b_values = {2.0, 4.0};
  config.lattice_sizes = {{3, 3}, {3, 4}};
  config.rho_values = {0.0, 0.5};
  const std::vector<BenchSetting> settings = enumerate_settings(config);
  REQUIRE(settings.size() == 8);
  CHECK(settings[0].b == 2.0);
  CHECK(settings[0].rho == 0.0);
  CHECK(settings[0].n() == 9);
  CHECK(settings[1].rho == 0.5);  // rho varies fastest
  CHECK(settings[2].n() == 12);   // then lattice size
  CHECK(settings[4].b == 4.0);    // decay exponent outermost
}

TEST_CASE("metrics aggregate only successful replicates") {
  BenchSetting setting{2.0, 0.3, 3, 3};
  std::vector<ReplicateOutcome> outcomes(3);
  outcomes[0].ok = true;
  outcomes[0].sq_err_hs_fcar = 0.04;
  outcomes[0].sq_err_hs_naive = 0.16;
  outcomes[0].sq_err_rho = 0.01;
  outcomes[0].sq_err_alpha = 0.0025;
  outcomes[0].covered = true;
  outcomes[0].rejected_fcar = true;
  outcomes[0].rejected_moran = false;
  outcomes[0].iterations = 3;
  outcomes[0].fit_ms = 10.0;
  outcomes[1] = outcomes[0];
  outcomes[1].sq_err_hs_fcar = 0.08;
  outcomes[1].covered = false;
  outcomes[1].rejected_moran = true;
  outcomes[1].iterations = 5;
  outcomes[1].fit_ms = 30.0;
  outcomes[2].ok = false;
  outcomes[2].note = "fit did not converge";

  const ReportRow row = compute_metrics(outcomes, setting);
  CHECK(row.b == 2.0);
  CHECK(row.rho == 0.3);
  CHECK(row.n == 9);
  CHECK(row.replicates == 3);
  CHECK(row.failures == 1);
  CHECK(row.mse_hs_fcar == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(row.mse_hs_naive == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(row.mse_rho == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(row.mse_alpha == doctest::Approx(0.0025).epsilon(1e-14));
  CHECK(row.coverage == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(row.rejection_fcar == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(row.rejection_moran == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(row.mean_iterations == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(row.mean_fit_ms == doctest::Approx(20.0).epsilon(1e-14));

  // Deterministic zero errors produce exact zero MSEs and full coverage.
  std::vector<ReplicateOutcome> perfect(2);
  for (auto& o : perfect) {
    o.ok = true;
    o.covered = true;
  }
  const ReportRow zero_row = compute_metrics(perfect, setting);
  CHECK(zero_row.mse_hs_fcar == 0.0);
  CHECK(zero_row.coverage == 1.0);
  CHECK(zero_row.failures == 0);

  // All replicates failing is an error, not a silent zero row.
  std::vector<ReplicateOutcome> failed(2);
  CHECK_THROWS_AS(compute_metrics(failed, setting), NumericError);
}

TEST_CASE("report formats serialize and parse back") {
  ReportRow row{};
  row.b = 2.0;
  row.rho = 0.3;
  row.n = 9;
  row.replicates = 2;
  row.failures = 0;
  row.mse_hs_fcar = 0.0625;
  row.mse_hs_naive = 0.25;
  row.mse_rho = 0.01;
  row.mse_alpha = 0.001;
  row.coverage = 0.95;
  row.rejection_fcar = 0.5;
  row.rejection_moran = 0.25;
  row.mean_iterations = 3.5;
  row.mean_fit_ms = 12.5;
  const std::vector<ReportRow> rows{row};

  const std::string csv = format_report(rows, ReportFormat::kCsv);
  // Header plus one data line.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.rfind("b,rho,n,replicates,failures,mse_hs_fcar,mse_hs_naive,"
                  "mse_rho,mse_alpha,coverage,rejection_fcar,rejection_moran,"
                  "mean_iterations,mean_fit_ms\n",
                  0) == 0);
  // Shortest-round-trip formatting: parsing the numbers back is exact.
  const std::string data_line = csv.substr(csv.find('\n') + 1);
  double parsed_mse = 0.0;
  REQUIRE(std::sscanf(data_line.c_str(), "%*f,%*f,%*d,%*d,%*d,%lf",
                      &parsed_mse) == 1);
  CHECK(parsed_mse == row.mse_hs_fcar);

  const nlohmann::json jdoc =
      nlohmann::json::parse(format_report(rows, ReportFormat::kJson));
  CHECK(jdoc.at("schema_version") == kSchemaVersion);
  REQUIRE(jdoc.at("rows").size() == 1);
  CHECK(jdoc.at("rows")[0].at("mse_hs_fcar") == row.mse_hs_fcar);
  CHECK(jdoc.at("rows")[0].at("coverage") == row.coverage);

  const std::string plot = format_report(rows, ReportFormat::kPlotData);
  CHECK(plot.rfind("b,rho,n,method,rejection_rate\n", 0) == 0);
  CHECK(std::count(plot.begin(), plot.end(), '\n') == 3);
  CHECK(plot.find("fcar") != std::string::npos);
  CHECK(plot.find("moran") != std::string::npos);

  const std::string path = scratch("report.csv");
  emit_report(rows, ReportFormat::kCsv, path);
  std::ifstream in(path);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  CHECK(contents == csv);
}

TEST_CASE("replicates are pure functions of their indices") {
  BenchConfig config;
  config.b_values = {2.0};
  config.lattice_sizes = {{3, 3}};
  config.rho_values = {0.3};
  config.replicates = 2;
  config.grid_size = 12;
  config.n_components = 5;
  config.burn_in = 20;
  config.base_seed = 7;

  const BenchSetting setting = enumerate_settings(config)[0];
  const auto run_a = run_setting(config, setting, 0);
  const auto run_b = run_setting(config, setting, 0);
  REQUIRE(run_a.size() == 2);
  REQUIRE(run_b.size() == 2);

  const auto same = [](const ReplicateOutcome& x, const ReplicateOutcome& y) {
    return x.ok == y.ok && x.note == y.note &&
           x.sq_err_hs_fcar == y.sq_err_hs_fcar &&
           x.sq_err_hs_naive == y.sq_err_hs_naive &&
           x.sq_err_rho == y.sq_err_rho && x.sq_err_alpha == y.sq_err_alpha &&
           x.covered == y.covered && x.rejected_fcar == y.rejected_fcar &&
           x.rejected_moran == y.rejected_moran &&
           x.iterations == y.iterations;
  };
  for (int r = 0; r < 2; ++r) CHECK(same(run_a[r], run_b[r]));

  // A longer run extends, never perturbs, a shorter one.
  BenchConfig longer = config;
  longer.replicates = 4;
  const auto run_long = run_setting(longer, setting, 0);
  REQUIRE(run_long.size() == 4);
  for (int r = 0; r < 2; ++r) CHECK(same(run_a[r], run_long[r]));

  // Parallel execution does not change results.
  BenchConfig parallel = longer;
  parallel.parallelism = 3;
  const auto run_par = run_setting(parallel, setting, 0);
  for (int r = 0; r < 4; ++r) CHECK(same(run_long[r], run_par[r]));

  // Different setting index decorrelates the stream.
  const auto run_other = run_setting(config, setting, 1);
  CHECK_FALSE(same(run_a[0], run_other[0]));
}

TEST_CASE("a tiny end-to-end benchmark produces sane rows") {
  BenchConfig config;
  config.b_values = {2.0};
  config.lattice_sizes = {{3, 3}};
  config.rho_values = {0.0, 0.6};
  config.replicates = 3;
  config.grid_size = 12;
  config.n_components = 5;
  config.burn_in = 20;
  config.base_seed = 11;

  int observed = 0;
  const std::vector<ReportRow> rows = run_monte_carlo(
      config, [&](const ReportRow&) { ++observed; });
  REQUIRE(rows.size() == 2);
  CHECK(observed == 2);
  for (const ReportRow& row : rows) {
    CHECK(row.replicates == 3);
    CHECK(row.failures >= 0);
    CHECK(row.failures < 3);
    CHECK(std::isfinite(row.mse_hs_fcar));
    CHECK(std::isfinite(row.mse_hs_naive));
    CHECK(std::isfinite(row.mse_rho));
    CHECK(std::isfinite(row.mse_alpha));
    CHECK(row.mse_hs_fcar >= 0.0);
    CHECK(row.coverage >= 0.0);
    CHECK(row.coverage <= 1.0);
    CHECK(row.rejection_fcar >= 0.0);
    CHECK(row.rejection_fcar <= 1.0);
    CHECK(row.rejection_moran >= 0.0);
    CHECK(row.rejection_moran <= 1.0);
    CHECK(row.mean_iterations >= 1.0);
    CHECK(row.mean_fit_ms >= 0.0);
  }
}

TEST_CASE("benchmark configs are validated up front") {
  BenchConfig config;
  config.lattice_sizes = {{3, 3}};
  config.rho_values = {1.2};  // outside the nested admissible interval
  CHECK_THROWS_AS(run_monte_carlo(config), ValidationError);

  BenchConfig bad_level;
  bad_level.nominal_level = 0.0;
  CHECK_THROWS_AS(run_monte_carlo(bad_level), ValidationError);

  BenchConfig bad_reps;
  bad_reps.replicates = 0;
  CHECK_THROWS_AS(run_monte_carlo(bad_reps), ValidationError);

  BenchConfig bad_lattice;
  bad_lattice.lattice_sizes = {};
  CHECK_THROWS_AS(run_monte_carlo(bad_lattice), ValidationError);
}

}  // TEST_SUITE
