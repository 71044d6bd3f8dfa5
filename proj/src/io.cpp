#include "fcar/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace fcar {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ValidationError("bad number '" + s + "' in " + context);
  return v;
}

long parse_long(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ValidationError("bad integer '" + s + "' in " + context);
  return v;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ValidationError("cannot open for reading: " + path);
  return file;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot open for writing: " + path);
  return file;
}

void check_schema_version(const json& j, const std::string& context) {
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion)
    throw ValidationError("unsupported schema_version in " + context);
}

json parse_json(std::istream& in, const std::string& context) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + context + ": " + e.what());
  }
}

// Uniform grid check: dataset CSV + sidecar can only describe grids built
// by TimeGrid::uniform.
void require_uniform(const TimeGrid& grid, const std::string& context) {
  const TimeGridPtr ref =
      TimeGrid::uniform(grid.t_min(), grid.t_max(), grid.size());
  if (!grid.same_as(*ref))
    throw ValidationError(context +
                          " supports only uniform trapezoidal grids");
}

json grid_to_json(const TimeGrid& grid) {
  return json{{"t_min", grid.t_min()},
              {"t_max", grid.t_max()},
              {"T", grid.size()}};
}

TimeGridPtr grid_from_json(const json& j, const std::string& context) {
  try {
    return TimeGrid::uniform(j.at("t_min").get<double>(),
                             j.at("t_max").get<double>(),
                             j.at("T").get<Eigen::Index>());
  } catch (const json::exception& e) {
    throw ValidationError("invalid grid in " + context + ": " + e.what());
  }
}

}  // namespace

std::string sidecar_path(const std::string& csv_path) {
  return csv_path + ".meta.json";
}

void write_dataset(const FunctionalDataset& data, const std::string& csv_path,
                   const json* sidecar_extra) {
  require_uniform(data.grid(), "dataset CSV");
  {
    std::ofstream file = open_for_write(csv_path);
    file << "location_id";
    for (Eigen::Index t = 0; t < data.grid().size(); ++t) file << ",t_" << t;
    file << "\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      file << data.location_ids()[static_cast<std::size_t>(i)];
      for (Eigen::Index t = 0; t < data.grid().size(); ++t)
        file << ',' << fmt_double(data.matrix()(i, t));
      file << "\n";
    }
    if (!file.good()) throw ValidationError("write failed: " + csv_path);
  }
  json meta = grid_to_json(data.grid());
  meta["schema_version"] = kSchemaVersion;
  if (sidecar_extra)
    for (const auto& [key, value] : sidecar_extra->items())
      meta[key] = value;
  write_json_file(meta, sidecar_path(csv_path));
}

FunctionalDataset read_dataset(const std::string& csv_path) {
  const json meta = read_json_file(sidecar_path(csv_path));
  check_schema_version(meta, sidecar_path(csv_path));
  const TimeGridPtr grid = grid_from_json(meta, sidecar_path(csv_path));
  const Eigen::Index T = grid->size();

  std::ifstream file = open_for_read(csv_path);
  std::string line;
  if (!std::getline(file, line))
    throw ValidationError("empty dataset CSV: " + csv_path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() != static_cast<std::size_t>(T) + 1)
    throw ValidationError("dataset CSV column count does not match sidecar T");
  if (header[0] != "location_id")
    throw ValidationError("dataset CSV must start with a location_id column");
  for (Eigen::Index t = 0; t < T; ++t)
    if (header[static_cast<std::size_t>(t) + 1] != "t_" + std::to_string(t))
      throw ValidationError("dataset CSV columns must be t_0 ... t_" +
                            std::to_string(T - 1));

  std::vector<std::string> ids;
  std::vector<double> values;
  while (std::getline(file, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(T) + 1)
      throw ValidationError("dataset CSV row has wrong field count");
    ids.push_back(fields[0]);
    for (Eigen::Index t = 0; t < T; ++t) {
      const double v =
          parse_double(fields[static_cast<std::size_t>(t) + 1], csv_path);
      if (!std::isfinite(v))
        throw ValidationError("non-finite value in " + csv_path);
      values.push_back(v);
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
  if (n < 1) throw ValidationError("dataset CSV has no data rows");
  Eigen::MatrixXd matrix(n, T);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < T; ++t)
      matrix(i, t) = values[static_cast<std::size_t>(i * T + t)];
  return FunctionalDataset(std::move(matrix), grid, std::move(ids));
}

void write_edge_list(const NeighborhoodGraph& graph, const std::string& path) {
  std::ofstream file = open_for_write(path);
  file << "src,dst\n";
  for (const auto& [i, j] : graph.edges())
    file << graph.location_ids()[static_cast<std::size_t>(i)] << ','
         << graph.location_ids()[static_cast<std::size_t>(j)] << "\n";
  if (!file.good()) throw ValidationError("write failed: " + path);
}

NeighborhoodGraph read_edge_list(
    const std::string& path, const std::vector<std::string>& location_ids) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < location_ids.size(); ++i)
    if (!index.emplace(location_ids[i], static_cast<int>(i)).second)
      throw ValidationError("duplicate location id: " + location_ids[i]);

  std::ifstream file = open_for_read(path);
  std::string line;
  if (!std::getline(file, line))
    throw ValidationError("empty edge-list CSV: " + path);
  {
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "src" || header[1] != "dst")
      throw ValidationError("edge-list CSV needs header 'src,dst'");
  }
  std::vector<std::pair<int, int>> edges;
  while (std::getline(file, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 2)
      throw ValidationError("edge-list CSV row needs exactly src,dst");
    const auto src = index.find(fields[0]);
    const auto dst = index.find(fields[1]);
    if (src == index.end())
      throw ValidationError("edge references unknown location id: " +
                            fields[0]);
    if (dst == index.end())
      throw ValidationError("edge references unknown location id: " +
                            fields[1]);
    edges.emplace_back(src->second, dst->second);
  }
  return build_from_edge_list(static_cast<int>(location_ids.size()), edges,
                              location_ids);
}

void write_kernel_csv(const CovOperator& op, const std::string& path) {
  std::ofstream file = open_for_write(path);
  for (Eigen::Index t = 0; t < op.size(); ++t)
    file << (t == 0 ? "" : ",") << "t_" << t;
  file << "\n";
  for (Eigen::Index s = 0; s < op.size(); ++s) {
    for (Eigen::Index t = 0; t < op.size(); ++t)
      file << (t == 0 ? "" : ",") << fmt_double(op.kernel()(s, t));
    file << "\n";
  }
  if (!file.good()) throw ValidationError("write failed: " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream file = open_for_read(path);
  std::string line;
  if (!std::getline(file, line))
    throw ValidationError("empty matrix CSV: " + path);
  const std::size_t cols = split_csv_line(line).size();  // header row
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(file, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != cols)
      throw ValidationError("ragged matrix CSV: " + path);
    for (const std::string& f : fields) values.push_back(parse_double(f, path));
    ++rows;
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = values[r * cols + c];
  return m;
}

json read_json_file(const std::string& path) {
  std::ifstream file = open_for_read(path);
  return parse_json(file, path);
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream file = open_for_write(path);
  file << j.dump(2) << "\n";
  if (!file.good()) throw ValidationError("write failed: " + path);
}

const char* variant_name(Variant v) {
  return v == Variant::kGeneral ? "general" : "nested";
}

Variant variant_from_name(const std::string& name) {
  if (name == "general") return Variant::kGeneral;
  if (name == "nested") return Variant::kNested;
  throw ValidationError("unknown variant '" + name +
                        "' (expected 'general' or 'nested')");
}

json graph_to_json(const NeighborhoodGraph& graph) {
  json j;
  j["n"] = graph.size();
  j["ids"] = graph.location_ids();
  if (graph.torus_dims()) {
    j["torus"] = {graph.torus_dims()->first, graph.torus_dims()->second};
  } else {
    json edges = json::array();
    for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
    j["edges"] = std::move(edges);
  }
  return j;
}

NeighborhoodGraph graph_from_json(const json& j) {
  try {
    if (j.contains("torus")) {
      const auto dims = j.at("torus");
      if (!dims.is_array() || dims.size() != 2)
        throw ValidationError("graph torus spec must be [rows, cols]");
      return build_torus(dims.at(0).get<int>(), dims.at(1).get<int>());
    }
    const int n = j.at("n").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ValidationError("graph edge must be [src, dst]");
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    std::vector<std::string> ids;
    if (j.contains("ids")) ids = j.at("ids").get<std::vector<std::string>>();
    return build_from_edge_list(n, edges, std::move(ids));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid graph spec: ") + e.what());
  }
}

SimJob load_sim_job(const std::string& path) {
  const json j = read_json_file(path);
  check_schema_version(j, path);
  try {
    SimConfig config;
    config.variant =
        variant_from_name(j.value("variant", std::string("nested")));
    config.dependence = j.at("dependence").get<double>();
    config.decay_b = j.value("decay_b", 2.0);
    config.n_components = j.value("n_components", 15);
    config.burn_in = j.value("burn_in", 200);
    config.seed = j.value("seed", std::uint64_t{0});

    TimeGridPtr grid = j.contains("grid")
                           ? grid_from_json(j.at("grid"), path)
                           : TimeGrid::uniform(0.0, 1.0, 50);
    NeighborhoodGraph graph = graph_from_json(j.at("graph"));

    json echo = j;
    echo["schema_version"] = kSchemaVersion;
    echo["variant"] = variant_name(config.variant);
    echo["decay_b"] = config.decay_b;
    echo["n_components"] = config.n_components;
    echo["burn_in"] = config.burn_in;
    echo["seed"] = config.seed;
    echo["grid"] = grid_to_json(*grid);
    return SimJob{config, std::move(graph), std::move(grid),
                  std::move(echo)};
  } catch (const json::exception& e) {
    throw ValidationError("invalid simulate config " + path + ": " +
                          e.what());
  }
}

FitJob fit_job_from_json(const json& j) {
  try {
    FitJob job;
    job.variant = variant_from_name(j.value("variant", std::string("nested")));
    job.config.fve_threshold = j.value("fve_threshold", 0.95);
    job.config.tau1 = j.value("tau1", 1e-4);
    job.config.tau2 = j.value("tau2", 1e-3);
    job.config.max_iterations = j.value("max_iterations", 50);
    job.config.initial_dependence = j.value("initial_dependence", 0.0);
    job.config.optimizer_tol = j.value("optimizer_tol", 1e-10);
    return job;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid fit config: ") + e.what());
  }
}

FitJob load_fit_job(const std::string& path) {
  if (path.empty()) return FitJob{};
  const json j = read_json_file(path);
  check_schema_version(j, path);
  return fit_job_from_json(j);
}

BenchConfig bench_config_from_json(const json& j) {
  try {
    BenchConfig config;
    if (j.contains("b_values"))
      config.b_values = j.at("b_values").get<std::vector<double>>();
    if (j.contains("rho_values"))
      config.rho_values = j.at("rho_values").get<std::vector<double>>();
    if (j.contains("lattice_sizes")) {
      config.lattice_sizes.clear();
      for (const auto& dims : j.at("lattice_sizes")) {
        if (!dims.is_array() || dims.size() != 2)
          throw ValidationError("lattice size must be [rows, cols]");
        config.lattice_sizes.emplace_back(dims.at(0).get<int>(),
                                          dims.at(1).get<int>());
      }
    }
    config.replicates = j.value("replicates", config.replicates);
    config.base_seed = j.value("base_seed", config.base_seed);
    config.grid_size = j.value("grid_size", config.grid_size);
    config.n_components = j.value("n_components", config.n_components);
    config.burn_in = j.value("burn_in", config.burn_in);
    config.nominal_level = j.value("nominal_level", config.nominal_level);
    config.parallelism = j.value("parallelism", config.parallelism);
    if (j.contains("fit")) config.fit = fit_job_from_json(j.at("fit")).config;
    return config;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid bench config: ") + e.what());
  }
}

BenchConfig load_bench_config(const std::string& path) {
  const json j = read_json_file(path);
  check_schema_version(j, path);
  return bench_config_from_json(j);
}

json fit_result_to_json(const FitResult& fit) {
  json trace = json::array();
  for (const FitIteration& it : fit.trace)
    trace.push_back({{"iteration", it.iteration},
                     {"dependence", it.dependence},
                     {"hs_change", it.hs_change},
                     {"p", it.p}});
  return json{{"schema_version", kSchemaVersion},
              {"variant", variant_name(fit.variant)},
              {"n", fit.n},
              {"dependence_hat", fit.dependence_hat},
              {"curvature", fit.curvature},
              {"p", fit.p},
              {"iterations", fit.iterations},
              {"converged", fit.converged},
              {"boundary", fit.boundary},
              {"interval", {{"lo", fit.interval.lo}, {"hi", fit.interval.hi}}},
              {"alpha_hat", std::vector<double>(
                                fit.alpha_hat.values().data(),
                                fit.alpha_hat.values().data() +
                                    fit.alpha_hat.values().size())},
              {"trace", std::move(trace)}};
}

json test_report_to_json(const TestReport& report) {
  return json{
      {"method",
       report.method == TestMethod::kFcar ? "fcar" : "morans_i"},
      {"statistic", report.statistic},
      {"p_value", report.p_value},
      {"estimate", report.estimate},
      {"standard_error", report.standard_error},
      {"nominal_level", report.nominal_level},
      {"reject", report.reject}};
}

json model_to_json(const FcarModel& model) {
  const Eigen::MatrixXd& k = model.gamma().kernel();
  std::vector<double> kernel;
  kernel.reserve(static_cast<std::size_t>(k.size()));
  for (Eigen::Index s = 0; s < k.rows(); ++s)
    for (Eigen::Index t = 0; t < k.cols(); ++t) kernel.push_back(k(s, t));
  return json{{"schema_version", kSchemaVersion},
              {"variant", variant_name(model.variant())},
              {"dependence", model.dependence()},
              {"alpha", std::vector<double>(
                            model.alpha().values().data(),
                            model.alpha().values().data() +
                                model.alpha().values().size())},
              {"gamma", std::move(kernel)},
              {"grid", grid_to_json(model.alpha().grid())},
              {"graph", graph_to_json(model.graph())}};
}

FcarModel model_from_json(const json& j) {
  check_schema_version(j, "model document");
  try {
    const TimeGridPtr grid = grid_from_json(j.at("grid"), "model document");
    const Eigen::Index T = grid->size();
    const auto alpha_values = j.at("alpha").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(alpha_values.size()) != T)
      throw ValidationError("model alpha length does not match grid");
    const auto kernel_values = j.at("gamma").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(kernel_values.size()) != T * T)
      throw ValidationError("model gamma size does not match grid");
    Eigen::VectorXd alpha(T);
    for (Eigen::Index t = 0; t < T; ++t)
      alpha(t) = alpha_values[static_cast<std::size_t>(t)];
    Eigen::MatrixXd kernel(T, T);
    for (Eigen::Index s = 0; s < T; ++s)
      for (Eigen::Index t = 0; t < T; ++t)
        kernel(s, t) = kernel_values[static_cast<std::size_t>(s * T + t)];
    auto graph =
        std::make_shared<NeighborhoodGraph>(graph_from_json(j.at("graph")));
    return FcarModel(std::move(graph),
                     variant_from_name(j.at("variant").get<std::string>()),
                     j.at("dependence").get<double>(), Curve(alpha, grid),
                     CovOperator(std::move(kernel), grid));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid model document: ") + e.what());
  }
}

}  // namespace fcar
