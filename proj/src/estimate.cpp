#include "fcar/estimate.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace fcar {

namespace {

const Eigen::VectorXd& variant_spectrum(const NeighborhoodGraph& graph,
                                        Variant variant) {
  const SpectrumCache& cache = graph.spectrum();
  if (variant == Variant::kGeneral) return cache.w_eigenvalues;
  if (cache.normalized_eigenvalues.size() == 0)
    throw ValidationError(
        "nested variant needs all row sums positive (isolated site present)");
  return cache.normalized_eigenvalues;
}

// Brent's method (golden section with parabolic acceleration) minimizing f
// over [lo, hi] to absolute parameter tolerance `tol`.
struct ScalarMin {
  double x;
  double fx;
};

ScalarMin brent_minimize(const std::function<double(double)>& f, double lo,
                         double hi, double tol) {
  constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
  constexpr int kMaxIter = 200;
  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-14;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      // Try a parabola through (x, w, v).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = kGolden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d
                                           : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx};
}

}  // namespace

CovOperator covariance_conditional(const FunctionalDataset& data,
                                   const NeighborhoodGraph& graph,
                                   Variant variant, double dependence,
                                   const Curve& alpha) {
  if (data.n() < 2)
    throw ValidationError("covariance estimation needs n >= 2");
  // At dependence 0 in the general variant the residual is Y_i - alpha and
  // the alpha shift cancels under the mean-centering inside
  // empirical_covariance, so the estimator coincides with
  // marginal_covariance exactly; taking the same code path keeps the two
  // bitwise identical.
  if (variant == Variant::kGeneral && dependence == 0.0) {
    if (data.n() != graph.size())
      throw ValidationError("dataset size does not match graph size");
    return CovOperator(empirical_covariance(data.matrix()), data.grid_ptr());
  }
  const Eigen::MatrixXd z =
      conditionally_center(data, graph, variant, dependence, alpha);
  return CovOperator(empirical_covariance(z), data.grid_ptr());
}

double projected_loglik(const Eigen::MatrixXd& scores,
                        const Eigen::VectorXd& eigenvalues,
                        const PrecisionForm& q) {
  const Eigen::Index n = scores.rows();
  const Eigen::Index p = scores.cols();
  if (eigenvalues.size() != p)
    throw ValidationError("eigenvalue count does not match score columns");
  if (n != q.graph().size())
    throw ValidationError("score rows do not match graph size");
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(eigenvalues(j) > 0.0))
      throw NumericError("degenerate component: nonpositive eigenvalue");
  const double log_det = log_det_precision(q);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd y = scores.col(j);
    acc += precision_quadratic(q, y, y) / eigenvalues(j) +
           static_cast<double>(n) * std::log(eigenvalues(j)) - log_det;
  }
  return -acc / (2.0 * static_cast<double>(n));
}

double loglik_curvature(int p, int n, const PrecisionForm& q) {
  if (p < 1) throw ValidationError("truncation level must be >= 1");
  if (n != q.graph().size())
    throw ValidationError("n does not match graph size");
  const Eigen::VectorXd& s = variant_spectrum(q.graph(), q.variant());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double denom = 1.0 - q.dependence() * s(i);
    acc += (s(i) * s(i)) / (denom * denom);
  }
  return -(static_cast<double>(p) / (2.0 * static_cast<double>(n))) * acc;
}

namespace {

// The quadratic part of the likelihood is affine in the dependence value:
//   sum_j quad_j(d) / lambda_j = A - d * B
// with A from the diagonal part and B from the neighbor cross terms. Both
// are precomputed once, making each likelihood evaluation O(n).
struct LoglikProfile {
  const NeighborhoodGraph* graph;
  Variant variant;
  double n;
  double p;
  double a;          // sum_j diag_j / lambda_j
  double b;          // sum_j cross_j / lambda_j
  double log_lambda; // sum_j log lambda_j

  LoglikProfile(const Eigen::MatrixXd& scores,
                const Eigen::VectorXd& eigenvalues,
                const NeighborhoodGraph& g, Variant var)
      : graph(&g), variant(var), n(static_cast<double>(scores.rows())),
        p(static_cast<double>(scores.cols())), a(0.0), b(0.0),
        log_lambda(0.0) {
    if (scores.rows() != g.size())
      throw ValidationError("score rows do not match graph size");
    if (scores.cols() < 1)
      throw ValidationError("need at least one score column");
    if (eigenvalues.size() != scores.cols())
      throw ValidationError("eigenvalue count does not match score columns");
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (!(eigenvalues(j) > 0.0))
        throw NumericError("degenerate component: nonpositive eigenvalue");
      const Eigen::VectorXd y = scores.col(j);
      double diag, cross = 0.0;
      if (var == Variant::kGeneral)
        diag = y.squaredNorm();
      else
        diag = y.cwiseAbs2().dot(g.row_sums());
      for (const auto& [s, t] : g.edges()) cross += 2.0 * y(s) * y(t);
      a += diag / eigenvalues(j);
      b += cross / eigenvalues(j);
      log_lambda += std::log(eigenvalues(j));
    }
  }

  double operator()(double dependence) const {
    const PrecisionForm q(*graph, variant, dependence);
    const double value = -((a - dependence * b) + n * log_lambda -
                           p * log_det_precision(q)) /
                         (2.0 * n);
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os << "non-finite likelihood at dependence " << dependence;
      throw NumericError(os.str());
    }
    return value;
  }
};

}  // namespace

MaximizeResult maximize_dependence(const Eigen::MatrixXd& scores,
                                   const Eigen::VectorXd& eigenvalues,
                                   const NeighborhoodGraph& graph,
                                   Variant variant, Interval interval,
                                   double tol) {
  if (!(tol > 0.0)) throw ValidationError("optimizer tolerance must be > 0");
  if (!(interval.lo < interval.hi))
    throw ValidationError("empty optimization interval");
  const LoglikProfile loglik(scores, eigenvalues, graph, variant);
  const ScalarMin best = brent_minimize(
      [&loglik](double d) { return -loglik(d); }, interval.lo, interval.hi,
      tol);
  // The likelihood is strictly concave, so the optimizer settles at the
  // unique interior maximum unless the true argmax sits at (or beyond)
  // an endpoint; flag when the solution is within a whisker of one.
  const double whisker = 10.0 * (tol * std::abs(best.x) + 1e-14);
  const bool boundary = (best.x - interval.lo) <= whisker ||
                        (interval.hi - best.x) <= whisker;
  return {best.x, -best.fx, boundary};
}

FitResult profile_fit(const FunctionalDataset& data,
                      const NeighborhoodGraph& graph, Variant variant,
                      const FitConfig& config) {
  if (!(config.fve_threshold > 0.0) || !(config.fve_threshold <= 1.0))
    throw ValidationError("FVE threshold must lie in (0, 1]");
  if (!(config.tau1 > 0.0) || !(config.tau2 > 0.0))
    throw ValidationError("convergence tolerances must be positive");
  if (config.max_iterations < 1)
    throw ValidationError("max_iterations must be >= 1");
  if (!(config.optimizer_tol > 0.0))
    throw ValidationError("optimizer tolerance must be > 0");
  if (data.n() < 2) throw ValidationError("profile fit needs n >= 2");
  if (data.n() != graph.size())
    throw ValidationError("dataset size does not match graph size");

  const Interval interval = admissible_interval(graph, variant);
  if (!(config.initial_dependence > interval.lo &&
        config.initial_dependence < interval.hi))
    throw ValidationError("initial dependence outside admissible interval");

  const Curve alpha = dataset_mean(data);
  const FunctionalDataset centered(
      data.matrix().rowwise() - alpha.values().transpose(), data.grid_ptr(),
      data.location_ids());

  double dep = config.initial_dependence;
  CovOperator gamma =
      covariance_conditional(data, graph, variant, dep, alpha);

  FitResult result{Curve(alpha), CovOperator(gamma), dep, 0.0, 0, 0,
                   false,        false,              {},  variant,
                   static_cast<int>(data.n()),       interval};

  int p = 0;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    CovOperator gamma_next =
        iter == 1 ? gamma
                  : covariance_conditional(data, graph, variant, dep, alpha);
    const double hs_change = hs_distance(gamma_next, gamma);
    gamma = std::move(gamma_next);

    const EigenSystem eig = spectral_decompose(gamma);
    p = truncate_by_fve(eig, config.fve_threshold);
    // Guard the lambda^{-1} terms: drop components below the conditioning
    // floor even if the FVE rule asked for them.
    const double floor = 1e-12 * eig.values()(0);
    while (p > 1 && eig.values()(p - 1) <= floor) --p;
    if (!(eig.values()(p - 1) > floor))
      throw NumericError("covariance estimate is numerically rank-deficient");

    const Eigen::MatrixXd scores = project_dataset(centered, eig, p);
    const Eigen::VectorXd lambda = eig.values().head(p);

    const MaximizeResult step = maximize_dependence(
        scores, lambda, graph, variant, interval, config.optimizer_tol);

    // Ascent within the iteration: under this iteration's (gamma, p) the
    // maximizer must do at least as well as the previous parameter value.
    const double at_prev =
        projected_loglik(scores, lambda, PrecisionForm(graph, variant, dep));
    if (step.loglik < at_prev - 1e-9 * (1.0 + std::abs(at_prev)))
      throw NumericError("likelihood decreased within a profile iteration");

    const double change = std::abs(step.dependence - dep);
    dep = step.dependence;
    result.boundary = step.boundary;
    result.iterations = iter;
    result.trace.push_back({iter, dep, hs_change, p});

    if (change <= config.tau1 && hs_change <= config.tau2) {
      result.converged = true;
      break;
    }
  }

  result.dependence_hat = dep;
  result.gamma_hat = std::move(gamma);
  result.p = p;
  result.curvature = loglik_curvature(
      p, static_cast<int>(data.n()), PrecisionForm(graph, variant, dep));
  return result;
}

}  // namespace fcar
