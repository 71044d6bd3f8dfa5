#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "fcar/function_space.hpp"
#include "fcar/lattice.hpp"
#include "fcar/rng.hpp"

namespace fcar {

// Process parameters for the Gibbs simulator. The conditional covariance is
// the rank-`n_components` trigonometric Karhunen-Loeve kernel with
// eigenvalues lambda_j = j^{-decay_b / 2}; `dependence` is interpreted
// according to `variant`. The graph is supplied separately.
struct SimConfig {
  Variant variant = Variant::kNested;
  double dependence = 0.0;
  double decay_b = 2.0;
  int n_components = 15;
  int burn_in = 200;
  std::uint64_t seed = 0;
};

// First `n_functions` elements of the trigonometric basis on the grid:
// column 0 is the constant 1, then sqrt(2) sin(2 pi k t), sqrt(2) cos(2 pi k t)
// alternate. On a uniform grid over [0, 1] these columns are exactly
// orthonormal under the trapezoidal inner product, so the KL kernel built
// from them has exactly the intended spectrum.
Eigen::MatrixXd trig_basis(const TimeGrid& grid, int n_functions);

// Component standard deviations lambda_j^{1/2} = j^{-b/4}, j = 1..n.
Eigen::VectorXd kl_std_devs(double decay_b, int n_components);

// One Karhunen-Loeve draw: mean + scale * sum_j lambda_j^{1/2} xi_j phi_j
// with xi_j iid standard normal, consumed in index order j = 1..n_components.
Curve kl_draw(const SimConfig& config, const Curve& mean, double scale,
              RngStream& rng);

// Gibbs sampler targeting the joint law of the model. Sites start as iid
// standard normals at every grid point, then `burn_in` systematic sweeps
// update sites in ascending index order, each site drawing from its full
// conditional (a KL draw around the conditional mean, scaled by
// w_i+^{-1/2} in the nested variant). Returns the state after the final
// sweep. Only the nested variant is supported; the general variant's full
// conditionals do not have the scaled-KL form and requesting it throws
// ValidationError.
FunctionalDataset gibbs_sample_dataset(const SimConfig& config,
                                       const NeighborhoodGraph& graph,
                                       const Curve& alpha,
                                       const TimeGridPtr& grid);

// Diagnostic variant used by the stationarity checks: continues the same
// chain past burn-in and returns `retain` states, one every `thin` sweeps
// (the k-th entry is the state after sweep burn_in + k * thin).
std::vector<Eigen::MatrixXd> gibbs_retained_draws(const SimConfig& config,
                                                  const NeighborhoodGraph& graph,
                                                  const Curve& alpha,
                                                  const TimeGridPtr& grid,
                                                  int retain, int thin = 1);

}  // namespace fcar
