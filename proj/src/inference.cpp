#include "fcar/inference.hpp"

#include <cmath>

namespace fcar {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

namespace {

// Rational approximation of the standard normal quantile (relative error
// below 1.15e-9 everywhere), then a single Halley step against erfc pushes
// the absolute error under 1e-14.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
            1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw ValidationError("normal quantile needs p in (0, 1)");
  double x = quantile_seed(p);
  // Halley refinement: e = Phi(x) - p, u = e / phi(x).
  const double e = normal_cdf(x) - p;
  const double density =
      std::exp(-0.5 * x * x) / 2.5066282746310005024;  // sqrt(2 pi)
  const double u = e / density;
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

ConfidenceInterval confidence_interval(const FitResult& fit,
                                       double confidence) {
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw ValidationError("confidence level must lie in (0, 1)");
  if (!std::isfinite(fit.curvature) || !(fit.curvature < 0.0))
    throw NumericError("invalid fit: curvature must be negative");
  const double z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
  const double half_width =
      z / std::sqrt(static_cast<double>(fit.n) * (-fit.curvature));
  ConfidenceInterval ci{};
  ci.confidence = confidence;
  ci.raw_lower = fit.dependence_hat - half_width;
  ci.raw_upper = fit.dependence_hat + half_width;
  ci.lower = std::max(ci.raw_lower, fit.interval.lo);
  ci.upper = std::min(ci.raw_upper, fit.interval.hi);
  ci.clipped = ci.lower != ci.raw_lower || ci.upper != ci.raw_upper;
  return ci;
}

TestReport dependence_test(const FitResult& fit, double significance) {
  if (!(significance > 0.0) || !(significance < 1.0))
    throw ValidationError("significance level must lie in (0, 1)");
  if (!std::isfinite(fit.curvature) || !(fit.curvature < 0.0))
    throw NumericError("invalid fit: curvature must be negative");
  const double se =
      1.0 / std::sqrt(static_cast<double>(fit.n) * (-fit.curvature));
  const double statistic = fit.dependence_hat / se;
  const double p_value = 2.0 * (1.0 - normal_cdf(std::abs(statistic)));
  TestReport report{};
  report.method = TestMethod::kFcar;
  report.statistic = statistic;
  report.p_value = p_value;
  report.estimate = fit.dependence_hat;
  report.standard_error = se;
  report.nominal_level = significance;
  report.reject =
      std::abs(statistic) > normal_quantile(1.0 - significance / 2.0);
  return report;
}

Eigen::VectorXd time_averages(const FunctionalDataset& data) {
  // Plain arithmetic mean over grid points (not a quadrature average):
  // the classical scalar reduction the baseline test is defined on.
  return data.matrix().rowwise().mean();
}

TestReport morans_i_test(const Eigen::VectorXd& values,
                         const NeighborhoodGraph& graph,
                         double significance) {
  if (!(significance > 0.0) || !(significance < 1.0))
    throw ValidationError("significance level must lie in (0, 1)");
  const int n = graph.size();
  if (values.size() != n)
    throw ValidationError("value count does not match graph size");
  if (n < 2) throw ValidationError("Moran's I needs n >= 2");
  if (graph.edges().empty())
    throw ValidationError("Moran's I needs at least one edge");

  const Eigen::VectorXd x = values.array() - values.mean();
  const double ss = x.squaredNorm();
  if (!(ss > 0.0))
    throw ValidationError("Moran's I undefined for constant input");

  double cross = 0.0;  // x~' W x~ over the binary symmetric weights
  for (const auto& [i, j] : graph.edges()) cross += 2.0 * x(i) * x(j);

  const double s0 = 2.0 * static_cast<double>(graph.edges().size());
  const double s1 = 2.0 * s0;  // sum_ij (w_ij + w_ji)^2 / 2 for binary W
  const double s2 = 4.0 * graph.row_sums().squaredNorm();

  const double observed = (static_cast<double>(n) / s0) * cross / ss;
  const double mean = -1.0 / static_cast<double>(n - 1);
  const double nn = static_cast<double>(n);
  // Variance under the normality assumption.
  const double variance =
      (nn * nn * s1 - nn * s2 + 3.0 * s0 * s0) /
          (s0 * s0 * (nn * nn - 1.0)) -
      mean * mean;
  if (!(variance > 0.0))
    throw NumericError("Moran's I variance is not positive");

  const double se = std::sqrt(variance);
  const double statistic = (observed - mean) / se;
  TestReport report{};
  report.method = TestMethod::kMoransI;
  report.statistic = statistic;
  report.p_value = 2.0 * (1.0 - normal_cdf(std::abs(statistic)));
  report.estimate = observed;
  report.standard_error = se;
  report.nominal_level = significance;
  report.reject =
      std::abs(statistic) > normal_quantile(1.0 - significance / 2.0);
  return report;
}

}  // namespace fcar
