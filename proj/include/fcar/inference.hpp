#pragma once

#include <Eigen/Dense>

#include "fcar/estimate.hpp"
#include "fcar/function_space.hpp"
#include "fcar/lattice.hpp"

namespace fcar {

// Standard normal CDF, accurate to ~1e-15 (via erfc).
double normal_cdf(double x);

// Standard normal quantile on (0, 1), accurate to at least 1e-12
// (rational approximation polished by one Halley step).
double normal_quantile(double p);

struct ConfidenceInterval {
  double lower;      // after clipping to the admissible interval
  double upper;
  double raw_lower;  // plain Wald endpoints, possibly outside it
  double raw_upper;
  bool clipped;
  double confidence;
};

// Wald interval for the dependence parameter,
//   estimate -+ z_{1-(1-confidence)/2} * (n * (-curvature))^{-1/2},
// clipped to the admissible interval with the raw endpoints retained.
// Degenerate curvature (>= 0 or non-finite) throws NumericError.
ConfidenceInterval confidence_interval(const FitResult& fit,
                                       double confidence);

enum class TestMethod { kFcar, kMoransI };

struct TestReport {
  TestMethod method;
  double statistic;
  double p_value;
  double estimate;        // dependence estimate or observed Moran's I
  double standard_error;  // of the estimate under the null
  double nominal_level;
  bool reject;
};

// Two-sided test of "no spatial dependence" (parameter = 0) built from the
// profile fit: T = sqrt(n) * sqrt(-curvature) * estimate, p = 2(1 - Phi(|T|)).
// Algebraically dual to confidence_interval: the test rejects at level a
// exactly when the (1 - a) raw interval excludes zero.
TestReport dependence_test(const FitResult& fit, double significance);

// Per-site scalar summaries T^{-1} sum_t Y_i(t), the classical reduction of
// curves used by the Moran's I baseline.
Eigen::VectorXd time_averages(const FunctionalDataset& data);

// Moran's I test of spatial autocorrelation on scalar site values, with
// moments under the normality assumption:
//   I = (n / S0) * (x~' W x~) / (x~' x~),  x~ = x - mean(x)
//   E[I] = -1 / (n - 1)
//   Var[I] = (n^2 S1 - n S2 + 3 S0^2) / (S0^2 (n^2 - 1)) - E[I]^2
// where S0 = sum_ij w_ij, S1 = 2 S0 for binary symmetric weights and
// S2 = 4 sum_i w_i+^2. Two-sided p-value from the normal approximation.
// Requires at least one edge and nonzero variance of x.
TestReport morans_i_test(const Eigen::VectorXd& values,
                         const NeighborhoodGraph& graph, double significance);

}  // namespace fcar
