#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"

namespace fcar {

class TimeGrid;
using TimeGridPtr = std::shared_ptr<const TimeGrid>;

// Sampling grid on [t_min, t_max] together with quadrature weights. Every
// integral in the library -- inner products, covariance traces,
// Hilbert-Schmidt norms -- is a weighted sum over this grid, so two objects
// are comparable only when they share a grid.
class TimeGrid {
 public:
  // Grid with explicit quadrature weights. Points must be strictly
  // increasing and weights positive.
  static TimeGridPtr make(Eigen::VectorXd points, Eigen::VectorXd weights);

  // Equally spaced grid with composite trapezoidal weights
  // (h/2, h, ..., h, h/2). Requires size >= 2 and t_min < t_max.
  static TimeGridPtr uniform(double t_min, double t_max, Eigen::Index size);

  Eigen::Index size() const { return points_.size(); }
  const Eigen::VectorXd& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double t_min() const { return points_(0); }
  double t_max() const { return points_(points_.size() - 1); }

  // Grids match if points and weights agree exactly.
  bool same_as(const TimeGrid& other) const;

 private:
  TimeGrid(Eigen::VectorXd points, Eigen::VectorXd weights)
      : points_(std::move(points)), weights_(std::move(weights)) {}

  Eigen::VectorXd points_;
  Eigen::VectorXd weights_;
};

// Quadrature inner product of two grid vectors: sum_t w_t f_t g_t.
// Templated on the expression types so Eigen blocks and products can be
// passed without materializing temporaries.
template <typename DerivedF, typename DerivedG>
double weighted_inner(const Eigen::MatrixBase<DerivedF>& f,
                      const Eigen::MatrixBase<DerivedG>& g,
                      const Eigen::VectorXd& weights) {
  return (f.array() * g.array() * weights.array()).sum();
}

// Single function sampled on a grid.
class Curve {
 public:
  Curve(Eigen::VectorXd values, TimeGridPtr grid);

  const Eigen::VectorXd& values() const { return values_; }
  const TimeGrid& grid() const { return *grid_; }
  const TimeGridPtr& grid_ptr() const { return grid_; }

 private:
  Eigen::VectorXd values_;
  TimeGridPtr grid_;
};

// Sample of curves observed on a common grid; row i of matrix() is the
// i-th curve. Location ids give rows a stable identity for file I/O.
class FunctionalDataset {
 public:
  FunctionalDataset(Eigen::MatrixXd matrix, TimeGridPtr grid,
                    std::vector<std::string> location_ids = {});

  Eigen::Index n() const { return matrix_.rows(); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const TimeGrid& grid() const { return *grid_; }
  const TimeGridPtr& grid_ptr() const { return grid_; }
  const std::vector<std::string>& location_ids() const { return ids_; }

  Curve curve(Eigen::Index i) const;

 private:
  Eigen::MatrixXd matrix_;
  TimeGridPtr grid_;
  std::vector<std::string> ids_;
};

// Symmetric covariance kernel sampled on a grid: kernel()(s, u) = K(t_s, t_u).
// Construction rejects kernels that are asymmetric beyond 1e-10 and stores
// the exactly symmetrized matrix. Positive semi-definiteness is not checked
// here; spectral_decompose enforces it where it matters.
class CovOperator {
 public:
  CovOperator(Eigen::MatrixXd kernel, TimeGridPtr grid);

  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const TimeGrid& grid() const { return *grid_; }
  const TimeGridPtr& grid_ptr() const { return grid_; }
  Eigen::Index size() const { return kernel_.rows(); }

  // Quadrature trace: sum_t w_t K(t, t).
  double trace() const;

 private:
  Eigen::MatrixXd kernel_;
  TimeGridPtr grid_;
};

// Eigendecomposition of a covariance operator under the quadrature inner
// product. Eigenvalues are nonincreasing with negatives clamped to zero;
// eigenfunctions (columns of functions()) are orthonormal in the weighted
// inner product and signed so that each one's largest-magnitude value is
// positive (first occurrence wins on ties).
class EigenSystem {
 public:
  EigenSystem(Eigen::VectorXd values, Eigen::MatrixXd functions,
              TimeGridPtr grid, int clamped_count);

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& functions() const { return functions_; }
  const TimeGrid& grid() const { return *grid_; }
  const TimeGridPtr& grid_ptr() const { return grid_; }

  // Number of negative raw eigenvalues that were clamped to zero.
  int clamped_count() const { return clamped_count_; }

  Curve eigenfunction(Eigen::Index j) const;

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd functions_;
  TimeGridPtr grid_;
  int clamped_count_;
};

// <f, g> = sum_t w_t f(t) g(t). Curves must share a grid.
double inner_product(const Curve& f, const Curve& g);

// sqrt(<f, f>).
double norm(const Curve& f);

// Hilbert-Schmidt distance between kernels on a common grid:
// sqrt( sum_{s,u} w_s w_u (A - B)(s, u)^2 ).
double hs_distance(const CovOperator& a, const CovOperator& b);

// Hilbert-Schmidt norm of a kernel: hs_distance from the zero operator.
double hs_norm(const CovOperator& a);

// Pointwise mean curve of the sample.
Curve dataset_mean(const FunctionalDataset& data);

// Row-sample covariance of a matrix whose rows are observations: columns are
// centered at their mean and K = X_c' X_c / n, exactly symmetrized. This is
// the one covariance kernel routine in the library; both the naive estimator
// and the spatially adjusted one funnel through it.
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& rows);

// Naive covariance estimator: empirical covariance of the curves,
// ignoring any spatial dependence.
CovOperator marginal_covariance(const FunctionalDataset& data);

// Weighted spectral decomposition of a covariance operator. Solves the
// symmetrized problem B = W^{1/2} K W^{1/2} and maps eigenvectors back by
// W^{-1/2}, so the returned eigenfunctions are orthonormal under the
// quadrature inner product. Throws NumericError if the operator is
// materially non-PSD (lambda_min < -1e-8 * trace).
EigenSystem spectral_decompose(const CovOperator& op);

// Smallest p whose leading eigenvalues explain at least `threshold` of the
// total variance. Requires 0 < threshold <= 1 and a positive total.
int truncate_by_fve(const EigenSystem& eig, double threshold);

// Scores of the dataset's curves on the leading p eigenfunctions:
// result(i, j) = <Y_i, phi_j>. Centering, when wanted, is the caller's job.
Eigen::MatrixXd project_dataset(const FunctionalDataset& data,
                                const EigenSystem& eig, int p);

}  // namespace fcar
