#include "fcar/model.hpp"

#include <cmath>
#include <sstream>

namespace fcar {

namespace {

// Smallest/largest relevant spectrum entries for the variant.
const Eigen::VectorXd& variant_spectrum(const NeighborhoodGraph& graph,
                                        Variant variant) {
  const SpectrumCache& cache = graph.spectrum();
  if (variant == Variant::kGeneral) return cache.w_eigenvalues;
  if (cache.normalized_eigenvalues.size() == 0)
    throw ValidationError(
        "nested variant needs all row sums positive (isolated site present)");
  return cache.normalized_eigenvalues;
}

// sum over edges of x_i y_j + x_j y_i.
double edge_cross_sum(const NeighborhoodGraph& graph, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
  double sum = 0.0;
  for (const auto& [i, j] : graph.edges())
    sum += x(i) * y(j) + x(j) * y(i);
  return sum;
}

}  // namespace

PrecisionForm::PrecisionForm(const NeighborhoodGraph& graph, Variant variant,
                             double dependence)
    : graph_(&graph), variant_(variant), dependence_(dependence) {
  if (!std::isfinite(dependence))
    throw ValidationError("dependence parameter must be finite");
  const Eigen::VectorXd& s = variant_spectrum(graph, variant);
  // Positive definiteness: 1 - dependence * s_i > 0 for every eigenvalue;
  // checking the two extremes suffices. Edgeless graphs have s identically
  // zero and every dependence value is admissible.
  const double s_max = s(0);
  const double s_min = s(s.size() - 1);
  if (!(1.0 - dependence * s_max > 0.0) || !(1.0 - dependence * s_min > 0.0)) {
    std::ostringstream os;
    os << "dependence " << dependence
       << " leaves the precision matrix non-positive-definite";
    throw ValidationError(os.str());
  }
}

double precision_quadratic(const PrecisionForm& q, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  const NeighborhoodGraph& g = q.graph();
  if (x.size() != g.size() || y.size() != g.size())
    throw ValidationError("vector length does not match graph size");
  const double cross = edge_cross_sum(g, x, y);
  if (q.variant() == Variant::kGeneral)
    return x.dot(y) - q.dependence() * cross;
  return x.cwiseProduct(g.row_sums()).dot(y) - q.dependence() * cross;
}

double log_det_precision(const PrecisionForm& q) {
  const NeighborhoodGraph& g = q.graph();
  const Eigen::VectorXd& s = variant_spectrum(g, q.variant());
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    log_det += std::log1p(-q.dependence() * s(i));
  if (q.variant() == Variant::kNested)
    log_det += g.row_sums().array().log().sum();
  return log_det;
}

FcarModel::FcarModel(std::shared_ptr<const NeighborhoodGraph> graph,
                     Variant variant, double dependence, Curve alpha,
                     CovOperator gamma)
    : graph_(std::move(graph)), variant_(variant), dependence_(dependence),
      alpha_(std::move(alpha)), gamma_(std::move(gamma)) {
  if (!graph_) throw ValidationError("model needs a graph");
  if (!alpha_.grid().same_as(gamma_.grid()))
    throw ValidationError("alpha and gamma live on different grids");
  if (variant_ == Variant::kNested && graph_->has_isolated())
    throw ValidationError("nested variant requires positive row sums");
  // Constructing the precision form proves admissibility.
  [[maybe_unused]] PrecisionForm check(*graph_, variant_, dependence_);
}

namespace {

void require_model_data(const NeighborhoodGraph& graph,
                        const FunctionalDataset& data, const Curve& alpha) {
  if (data.n() != graph.size())
    throw ValidationError("dataset size does not match graph size");
  if (!data.grid().same_as(alpha.grid()))
    throw ValidationError("dataset and alpha live on different grids");
}

}  // namespace

Curve conditional_mean(const FcarModel& model, const FunctionalDataset& data,
                       int i) {
  require_model_data(model.graph(), data, model.alpha());
  if (i < 0 || i >= model.graph().size())
    throw ValidationError("site index out of range");
  const Eigen::VectorXd& a = model.alpha().values();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(a.size());
  for (int j : model.graph().neighbors(i))
    acc += data.matrix().row(j).transpose() - a;
  const double coef = model.variant() == Variant::kGeneral
                          ? model.dependence()
                          : model.dependence() / model.graph().row_sums()(i);
  return Curve(a + coef * acc, data.grid_ptr());
}

Eigen::MatrixXd conditionally_center(const FunctionalDataset& data,
                                     const NeighborhoodGraph& graph,
                                     Variant variant, double dependence,
                                     const Curve& alpha) {
  require_model_data(graph, data, alpha);
  [[maybe_unused]] PrecisionForm check(graph, variant, dependence);  // admissibility
  if (variant == Variant::kNested && graph.has_isolated())
    throw ValidationError("nested variant requires positive row sums");

  const Eigen::MatrixXd centered =
      data.matrix().rowwise() - alpha.values().transpose();
  Eigen::MatrixXd z(centered.rows(), centered.cols());
  for (int i = 0; i < graph.size(); ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(centered.cols());
    for (int j : graph.neighbors(i)) acc += centered.row(j);
    if (variant == Variant::kGeneral) {
      z.row(i) = centered.row(i) - dependence * acc;
    } else {
      const double w = graph.row_sums()(i);
      // Residual around the conditional mean, rescaled by sqrt(w_i+) so the
      // row's conditional covariance is gamma itself rather than gamma/w_i+.
      z.row(i) = std::sqrt(w) * (centered.row(i) - (dependence / w) * acc);
    }
  }
  return z;
}

FunctionalDataset conditionally_center(const FcarModel& model,
                                       const FunctionalDataset& data) {
  return FunctionalDataset(
      conditionally_center(data, model.graph(), model.variant(),
                           model.dependence(), model.alpha()),
      data.grid_ptr(), data.location_ids());
}

}  // namespace fcar
