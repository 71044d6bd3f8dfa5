#include "fcar/simulate.hpp"

#include <cmath>

#include "fcar/model.hpp"

namespace fcar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;

void validate_config(const SimConfig& config) {
  if (!(config.decay_b > 0.0))
    throw ValidationError("decay exponent b must be positive");
  if (config.n_components < 1)
    throw ValidationError("need at least one KL component");
  if (config.burn_in < 1) throw ValidationError("burn-in must be >= 1");
}

// Shared state of one Gibbs chain. RNG consumption order is part of the
// output contract: n * T normals for the initial state, then per sweep n
// sites in ascending order, each consuming n_components normals.
struct Chain {
  const NeighborhoodGraph& graph;
  const Curve& alpha;
  Eigen::MatrixXd basis;     // T x J
  Eigen::VectorXd std_devs;  // J
  Eigen::MatrixXd state;     // n x T
  double dependence;
  RngStream rng;

  Chain(const SimConfig& config, const NeighborhoodGraph& g, const Curve& a,
        const TimeGridPtr& grid)
      : graph(g), alpha(a), basis(trig_basis(*grid, config.n_components)),
        std_devs(kl_std_devs(config.decay_b, config.n_components)),
        state(g.size(), grid->size()), dependence(config.dependence),
        rng(RngStream::derive(config.seed, 0)) {
    for (Eigen::Index i = 0; i < state.rows(); ++i)
      for (Eigen::Index t = 0; t < state.cols(); ++t)
        state(i, t) = rng.normal();
  }

  void sweep() {
    const Eigen::VectorXd& a = alpha.values();
    const int j_count = static_cast<int>(std_devs.size());
    Eigen::VectorXd xi(j_count);
    for (int i = 0; i < graph.size(); ++i) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(a.size());
      for (int j : graph.neighbors(i))
        acc += state.row(j).transpose() - a;
      const double w = graph.row_sums()(i);
      // Full conditional: Gaussian around the conditional mean with
      // covariance gamma / w_i+, realized as a KL draw scaled by w^{-1/2}.
      const Eigen::VectorXd mean = a + (dependence / w) * acc;
      for (int j = 0; j < j_count; ++j) xi(j) = std_devs(j) * rng.normal();
      state.row(i) =
          (mean + (1.0 / std::sqrt(w)) * (basis * xi)).transpose();
    }
  }
};

}  // namespace

Eigen::MatrixXd trig_basis(const TimeGrid& grid, int n_functions) {
  if (n_functions < 1) throw ValidationError("basis needs >= 1 function");
  Eigen::MatrixXd basis(grid.size(), n_functions);
  basis.col(0).setOnes();
  for (int j = 1; j < n_functions; ++j) {
    const int k = (j + 1) / 2;
    for (Eigen::Index t = 0; t < grid.size(); ++t) {
      const double arg = 2.0 * kPi * k * grid.points()(t);
      basis(t, j) = kSqrt2 * (j % 2 == 1 ? std::sin(arg) : std::cos(arg));
    }
  }
  return basis;
}

Eigen::VectorXd kl_std_devs(double decay_b, int n_components) {
  if (!(decay_b > 0.0))
    throw ValidationError("decay exponent b must be positive");
  if (n_components < 1)
    throw ValidationError("need at least one KL component");
  Eigen::VectorXd sd(n_components);
  for (int j = 0; j < n_components; ++j)
    sd(j) = std::pow(static_cast<double>(j + 1), -decay_b / 4.0);
  return sd;
}

Curve kl_draw(const SimConfig& config, const Curve& mean, double scale,
              RngStream& rng) {
  validate_config(config);
  if (!(scale >= 0.0)) throw ValidationError("scale must be nonnegative");
  const Eigen::MatrixXd basis = trig_basis(mean.grid(), config.n_components);
  const Eigen::VectorXd sd = kl_std_devs(config.decay_b, config.n_components);
  Eigen::VectorXd xi(config.n_components);
  for (int j = 0; j < config.n_components; ++j) xi(j) = sd(j) * rng.normal();
  return Curve(mean.values() + scale * (basis * xi), mean.grid_ptr());
}

namespace {

Chain start_chain(const SimConfig& config, const NeighborhoodGraph& graph,
                  const Curve& alpha, const TimeGridPtr& grid) {
  validate_config(config);
  if (config.variant != Variant::kNested)
    throw ValidationError(
        "Gibbs simulation supports only the nested variant (the general "
        "variant's full conditionals are not scaled-KL draws)");
  if (graph.has_isolated())
    throw ValidationError("nested variant requires positive row sums");
  if (!grid) throw ValidationError("null time grid");
  if (!alpha.grid().same_as(*grid))
    throw ValidationError("alpha does not live on the simulation grid");
  // Admissibility of the dependence value.
  [[maybe_unused]] PrecisionForm check(graph, Variant::kNested,
                                       config.dependence);
  return Chain(config, graph, alpha, grid);
}

}  // namespace

FunctionalDataset gibbs_sample_dataset(const SimConfig& config,
                                       const NeighborhoodGraph& graph,
                                       const Curve& alpha,
                                       const TimeGridPtr& grid) {
  Chain chain = start_chain(config, graph, alpha, grid);
  for (int s = 0; s < config.burn_in; ++s) chain.sweep();
  return FunctionalDataset(std::move(chain.state), grid,
                           graph.location_ids());
}

std::vector<Eigen::MatrixXd> gibbs_retained_draws(
    const SimConfig& config, const NeighborhoodGraph& graph,
    const Curve& alpha, const TimeGridPtr& grid, int retain, int thin) {
  if (retain < 1) throw ValidationError("retain must be >= 1");
  if (thin < 1) throw ValidationError("thin must be >= 1");
  Chain chain = start_chain(config, graph, alpha, grid);
  for (int s = 0; s < config.burn_in; ++s) chain.sweep();
  std::vector<Eigen::MatrixXd> draws;
  draws.reserve(static_cast<std::size_t>(retain));
  for (int k = 0; k < retain; ++k) {
    for (int s = 0; s < thin; ++s) chain.sweep();
    draws.push_back(chain.state);
  }
  return draws;
}

}  // namespace fcar
