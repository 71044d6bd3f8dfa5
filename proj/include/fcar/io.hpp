#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "fcar/bench.hpp"
#include "fcar/estimate.hpp"
#include "fcar/function_space.hpp"
#include "fcar/inference.hpp"
#include "fcar/lattice.hpp"
#include "fcar/model.hpp"
#include "fcar/simulate.hpp"

// File formats.
//
// Dataset CSV (wide): header `location_id,t_0,...,t_{T-1}`, one row per
// location. The grid lives in a JSON sidecar at `<csv path>.meta.json`
// holding t_min, t_max, T (uniform grid, trapezoidal weights); files written
// by `fcar simulate` echo the simulation config there as well.
//
// Edge-list CSV: header `src,dst`, one undirected edge per row, endpoints
// given as location ids.
//
// All JSON documents carry `schema_version` (currently 1).

namespace fcar {

inline constexpr int kSchemaVersion = 1;

std::string sidecar_path(const std::string& csv_path);

void write_dataset(const FunctionalDataset& data, const std::string& csv_path,
                   const nlohmann::json* sidecar_extra = nullptr);
FunctionalDataset read_dataset(const std::string& csv_path);

void write_edge_list(const NeighborhoodGraph& graph, const std::string& path);

// Reads an edge list whose endpoints are the given location ids; index i in
// the result is position i in `location_ids` (i.e. the dataset row order).
NeighborhoodGraph read_edge_list(const std::string& path,
                                 const std::vector<std::string>& location_ids);

// Plain numeric matrix CSV with a `t_<k>` header row; used for estimated
// covariance kernels (plot input).
void write_kernel_csv(const CovOperator& op, const std::string& path);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

// --- configs ---------------------------------------------------------------

// Parsed `fcar simulate` job: process config plus the graph and grid it
// runs on, and the original document for the sidecar echo.
struct SimJob {
  SimConfig config;
  NeighborhoodGraph graph;
  TimeGridPtr grid;
  nlohmann::json echo;
};
SimJob load_sim_job(const std::string& path);

// Parsed `fcar fit` / `fcar test` config: fitting knobs plus the variant.
struct FitJob {
  FitConfig config;
  Variant variant = Variant::kNested;
};
FitJob fit_job_from_json(const nlohmann::json& j);
FitJob load_fit_job(const std::string& path);

BenchConfig bench_config_from_json(const nlohmann::json& j);
BenchConfig load_bench_config(const std::string& path);

// --- results & round-trips --------------------------------------------------

nlohmann::json fit_result_to_json(const FitResult& fit);
nlohmann::json test_report_to_json(const TestReport& report);

nlohmann::json graph_to_json(const NeighborhoodGraph& graph);
NeighborhoodGraph graph_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const FcarModel& model);
FcarModel model_from_json(const nlohmann::json& j);

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

}  // namespace fcar
