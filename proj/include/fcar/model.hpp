#pragma once

#include <Eigen/Dense>

#include <memory>

#include "fcar/function_space.hpp"
#include "fcar/lattice.hpp"

namespace fcar {

// Precision matrix of the dependence structure in implicit form:
//   general: Q(eta) = I - eta W
//   nested:  Q(rho) = D - rho W
// Never materialized; quadratic forms run over the edge list and the log
// determinant comes from the graph's cached spectrum. Construction validates
// positive definiteness, so holding a PrecisionForm is proof that the
// dependence value is admissible. Holds a non-owning pointer to the graph,
// which must outlive it.
class PrecisionForm {
 public:
  PrecisionForm(const NeighborhoodGraph& graph, Variant variant,
                double dependence);

  Variant variant() const { return variant_; }
  double dependence() const { return dependence_; }
  const NeighborhoodGraph& graph() const { return *graph_; }

 private:
  const NeighborhoodGraph* graph_;
  Variant variant_;
  double dependence_;
};

// x' Q y in O(n + #edges):
//   general: x'y - eta * sum_edges (x_i y_j + x_j y_i)
//   nested:  sum_i w_i+ x_i y_i - rho * sum_edges (x_i y_j + x_j y_i)
double precision_quadratic(const PrecisionForm& q, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y);

// log det Q from the cached adjacency spectrum:
//   general: sum_i log(1 - eta * nu_i)
//   nested:  sum_i log(w_i+) + sum_i log(1 - rho * mu_i)
double log_det_precision(const PrecisionForm& q);

// Functional conditional autoregressive model: mean curve alpha, conditional
// covariance operator gamma, dependence parameter over a neighborhood graph.
// The graph is shared because datasets, fits and simulations all refer to
// the same sites.
class FcarModel {
 public:
  FcarModel(std::shared_ptr<const NeighborhoodGraph> graph, Variant variant,
            double dependence, Curve alpha, CovOperator gamma);

  const NeighborhoodGraph& graph() const { return *graph_; }
  const std::shared_ptr<const NeighborhoodGraph>& graph_ptr() const {
    return graph_;
  }
  Variant variant() const { return variant_; }
  double dependence() const { return dependence_; }
  const Curve& alpha() const { return alpha_; }
  const CovOperator& gamma() const { return gamma_; }

 private:
  std::shared_ptr<const NeighborhoodGraph> graph_;
  Variant variant_;
  double dependence_;
  Curve alpha_;
  CovOperator gamma_;
};

// Conditional mean curve of site i given all other sites:
//   general: alpha + eta *        sum_{j ~ i} (Y_j - alpha)
//   nested:  alpha + rho / w_i+ * sum_{j ~ i} (Y_j - alpha)
Curve conditional_mean(const FcarModel& model, const FunctionalDataset& data,
                       int i);

// Conditional residuals, one row per site:
//   general: Z_i = (Y_i - alpha) - eta * sum_{j ~ i} (Y_j - alpha)
//   nested:  Z_i = sqrt(w_i+) * [ (Y_i - alpha) - rho / w_i+ * sum_{j ~ i} (Y_j - alpha) ]
// The nested rescaling puts every site's residual on the same scale, so the
// empirical covariance of the rows targets gamma itself rather than a
// mixture of gamma / w_i+.
Eigen::MatrixXd conditionally_center(const FunctionalDataset& data,
                                     const NeighborhoodGraph& graph,
                                     Variant variant, double dependence,
                                     const Curve& alpha);

// Model-level wrapper: residual rows packaged as a dataset on the same grid.
FunctionalDataset conditionally_center(const FcarModel& model,
                                       const FunctionalDataset& data);

}  // namespace fcar
