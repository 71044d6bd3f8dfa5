#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fcar/function_space.hpp"
#include "fcar/lattice.hpp"
#include "fcar/model.hpp"

namespace fcar {

// Knobs of the profile fitting loop.
struct FitConfig {
  double fve_threshold = 0.95;   // fraction of variance kept by truncation
  double tau1 = 1e-4;            // stop when |dependence change| <= tau1 ...
  double tau2 = 1e-3;            // ... and HS change of gamma_hat <= tau2
  int max_iterations = 50;
  double initial_dependence = 0.0;
  double optimizer_tol = 1e-10;  // parameter tolerance of the 1-d maximizer
};

// One row of the fitting trace.
struct FitIteration {
  int iteration;      // 1-based
  double dependence;  // value after this iteration's maximization
  double hs_change;   // HS distance between consecutive gamma_hat
  int p;              // truncation level used this iteration
};

struct FitResult {
  Curve alpha_hat;
  CovOperator gamma_hat;
  double dependence_hat;
  double curvature;  // second derivative of the profile log-likelihood at
                     // dependence_hat; negative by concavity
  int p;
  int iterations;
  bool converged;  // false when max_iterations was hit first
  bool boundary;   // maximizer pinned at an admissible-interval endpoint
  std::vector<FitIteration> trace;

  // Context carried along for inference and reporting.
  Variant variant;
  int n;
  Interval interval;
};

// Covariance estimator adjusted for spatial dependence: empirical covariance
// of the conditionally centered residual rows at the given dependence value.
// At dependence 0 in the general variant the residuals are the raw curves,
// so the result coincides with marginal_covariance bit for bit.
CovOperator covariance_conditional(const FunctionalDataset& data,
                                   const NeighborhoodGraph& graph,
                                   Variant variant, double dependence,
                                   const Curve& alpha);

// Profile log-likelihood of the dependence parameter given fixed scores and
// eigenvalues:
//   l(d) = -(2n)^{-1} sum_j [ lambda_j^{-1} y_j' Q(d) y_j + n log lambda_j
//                             - log det Q(d) ]
// where y_j is column j of `scores` (the j-th component across sites).
// Eigenvalues must be positive; returns a finite value for admissible d.
double projected_loglik(const Eigen::MatrixXd& scores,
                        const Eigen::VectorXd& eigenvalues,
                        const PrecisionForm& q);

// Exact second derivative of the profile log-likelihood, which does not
// depend on the data:
//   l''(d) = -(p / 2n) sum_i s_i^2 / (1 - d s_i)^2
// with s the adjacency spectrum (general) or normalized spectrum (nested).
// Strictly negative whenever the graph has edges, so l is strictly concave
// on the admissible interval.
double loglik_curvature(int p, int n, const PrecisionForm& q);

struct MaximizeResult {
  double dependence;
  double loglik;
  bool boundary;  // maximum within a few tolerances of an interval endpoint
};

// Maximizes the profile log-likelihood over the admissible interval with a
// derivative-free scalar optimizer (golden section with parabolic steps).
// Concavity makes the interior maximum unique; evaluations that come back
// non-finite throw NumericError.
MaximizeResult maximize_dependence(const Eigen::MatrixXd& scores,
                                   const Eigen::VectorXd& eigenvalues,
                                   const NeighborhoodGraph& graph,
                                   Variant variant, Interval interval,
                                   double tol = 1e-10);

// Alternating profile estimation of (gamma, dependence):
//   alpha_hat = pointwise sample mean, fixed throughout;
//   repeat: gamma_hat from residuals at the current dependence value,
//           spectral truncation by FVE, score projection, then a fresh
//           1-d maximization of the dependence parameter;
//   stop when both parameter change and HS change fall under (tau1, tau2),
//   or after max_iterations (converged = false, not an error).
// Each iteration must not decrease the projected likelihood at matched
// truncation; a material decrease throws NumericError.
FitResult profile_fit(const FunctionalDataset& data,
                      const NeighborhoodGraph& graph, Variant variant,
                      const FitConfig& config = {});

}  // namespace fcar
