#include "fcar/function_space.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace fcar {

namespace {

std::string dim_msg(const char* what, Eigen::Index got, Eigen::Index want) {
  std::ostringstream os;
  os << what << ": got " << got << ", expected " << want;
  return os.str();
}

}  // namespace

TimeGridPtr TimeGrid::make(Eigen::VectorXd points, Eigen::VectorXd weights) {
  if (points.size() < 2)
    throw ValidationError("time grid needs at least 2 points");
  if (weights.size() != points.size())
    throw ValidationError(
        dim_msg("grid weights length", weights.size(), points.size()));
  for (Eigen::Index t = 1; t < points.size(); ++t)
    if (!(points(t) > points(t - 1)))
      throw ValidationError("grid points must be strictly increasing");
  if (!(weights.minCoeff() > 0.0))
    throw ValidationError("quadrature weights must be positive");
  return TimeGridPtr(new TimeGrid(std::move(points), std::move(weights)));
}

TimeGridPtr TimeGrid::uniform(double t_min, double t_max, Eigen::Index size) {
  if (size < 2) throw ValidationError("uniform grid needs at least 2 points");
  if (!(t_min < t_max))
    throw ValidationError("uniform grid requires t_min < t_max");
  const double h = (t_max - t_min) / static_cast<double>(size - 1);
  Eigen::VectorXd points(size);
  for (Eigen::Index t = 0; t < size; ++t)
    points(t) = t_min + h * static_cast<double>(t);
  points(size - 1) = t_max;  // avoid drift in the last point
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(size, h);
  weights(0) = h / 2.0;
  weights(size - 1) = h / 2.0;
  return TimeGridPtr(new TimeGrid(std::move(points), std::move(weights)));
}

bool TimeGrid::same_as(const TimeGrid& other) const {
  return points_.size() == other.points_.size() && points_ == other.points_ &&
         weights_ == other.weights_;
}

namespace {

void require_grid(const TimeGridPtr& grid) {
  if (!grid) throw ValidationError("null time grid");
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (!a.same_as(b))
    throw ValidationError("operands live on different time grids");
}

}  // namespace

Curve::Curve(Eigen::VectorXd values, TimeGridPtr grid)
    : values_(std::move(values)), grid_(std::move(grid)) {
  require_grid(grid_);
  if (values_.size() != grid_->size())
    throw ValidationError(
        dim_msg("curve length", values_.size(), grid_->size()));
}

FunctionalDataset::FunctionalDataset(Eigen::MatrixXd matrix, TimeGridPtr grid,
                                     std::vector<std::string> location_ids)
    : matrix_(std::move(matrix)), grid_(std::move(grid)),
      ids_(std::move(location_ids)) {
  require_grid(grid_);
  if (matrix_.rows() < 1) throw ValidationError("dataset needs n >= 1 curves");
  if (matrix_.cols() != grid_->size())
    throw ValidationError(
        dim_msg("dataset columns", matrix_.cols(), grid_->size()));
  if (ids_.empty()) {
    ids_.reserve(static_cast<std::size_t>(matrix_.rows()));
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i)
      ids_.push_back(std::to_string(i));
  }
  if (static_cast<Eigen::Index>(ids_.size()) != matrix_.rows())
    throw ValidationError(dim_msg("location id count",
                                  static_cast<Eigen::Index>(ids_.size()),
                                  matrix_.rows()));
  for (std::size_t i = 0; i < ids_.size(); ++i)
    for (std::size_t j = i + 1; j < ids_.size(); ++j)
      if (ids_[i] == ids_[j])
        throw ValidationError("duplicate location id: " + ids_[i]);
}

Curve FunctionalDataset::curve(Eigen::Index i) const {
  if (i < 0 || i >= matrix_.rows())
    throw ValidationError("curve index out of range");
  return Curve(matrix_.row(i).transpose(), grid_);
}

CovOperator::CovOperator(Eigen::MatrixXd kernel, TimeGridPtr grid)
    : kernel_(std::move(kernel)), grid_(std::move(grid)) {
  require_grid(grid_);
  if (kernel_.rows() != kernel_.cols())
    throw ValidationError("covariance kernel must be square");
  if (kernel_.rows() != grid_->size())
    throw ValidationError(
        dim_msg("kernel size", kernel_.rows(), grid_->size()));
  const double asym = (kernel_ - kernel_.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-10))
    throw ValidationError("covariance kernel asymmetric beyond 1e-10");
  // Exact symmetrization; a no-op (bitwise) when the input is already
  // symmetric, since (x + x) / 2 == x in IEEE arithmetic.
  kernel_ = ((kernel_ + kernel_.transpose()) / 2.0).eval();
}

double CovOperator::trace() const {
  return kernel_.diagonal().dot(grid_->weights());
}

EigenSystem::EigenSystem(Eigen::VectorXd values, Eigen::MatrixXd functions,
                         TimeGridPtr grid, int clamped_count)
    : values_(std::move(values)), functions_(std::move(functions)),
      grid_(std::move(grid)), clamped_count_(clamped_count) {
  require_grid(grid_);
  if (functions_.rows() != grid_->size())
    throw ValidationError(
        dim_msg("eigenfunction rows", functions_.rows(), grid_->size()));
  if (values_.size() != functions_.cols())
    throw ValidationError(dim_msg("eigenvalue count", values_.size(),
                                  functions_.cols()));
  for (Eigen::Index j = 1; j < values_.size(); ++j)
    if (values_(j) > values_(j - 1))
      throw ValidationError("eigenvalues must be nonincreasing");
  if (values_.size() > 0 && values_(values_.size() - 1) < 0.0)
    throw ValidationError("eigenvalues must be nonnegative");
}

Curve EigenSystem::eigenfunction(Eigen::Index j) const {
  if (j < 0 || j >= functions_.cols())
    throw ValidationError("eigenfunction index out of range");
  return Curve(functions_.col(j), grid_);
}

double inner_product(const Curve& f, const Curve& g) {
  require_same_grid(f.grid(), g.grid());
  return weighted_inner(f.values(), g.values(), f.grid().weights());
}

double norm(const Curve& f) {
  return std::sqrt(weighted_inner(f.values(), f.values(), f.grid().weights()));
}

double hs_distance(const CovOperator& a, const CovOperator& b) {
  require_same_grid(a.grid(), b.grid());
  const Eigen::VectorXd& w = a.grid().weights();
  const Eigen::MatrixXd diff = a.kernel() - b.kernel();
  // sum_{s,u} w_s w_u diff(s,u)^2 == || W^{1/2} diff W^{1/2} ||_F^2.
  const double sq = (w.asDiagonal() * diff.cwiseAbs2() * w.asDiagonal()).sum();
  return std::sqrt(std::max(sq, 0.0));
}

double hs_norm(const CovOperator& a) {
  const Eigen::VectorXd& w = a.grid().weights();
  const double sq =
      (w.asDiagonal() * a.kernel().cwiseAbs2() * w.asDiagonal()).sum();
  return std::sqrt(std::max(sq, 0.0));
}

Curve dataset_mean(const FunctionalDataset& data) {
  return Curve(data.matrix().colwise().mean().transpose(), data.grid_ptr());
}

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1) throw ValidationError("empirical covariance of nothing");
  const Eigen::MatrixXd centered =
      rows.rowwise() - rows.colwise().mean();
  Eigen::MatrixXd k =
      (centered.transpose() * centered) / static_cast<double>(rows.rows());
  // GEMM output is symmetric only up to rounding; make it exact.
  k = ((k + k.transpose()) / 2.0).eval();
  return k;
}

CovOperator marginal_covariance(const FunctionalDataset& data) {
  return CovOperator(empirical_covariance(data.matrix()), data.grid_ptr());
}

EigenSystem spectral_decompose(const CovOperator& op) {
  const Eigen::Index T = op.size();
  const Eigen::VectorXd sqrt_w = op.grid().weights().cwiseSqrt();
  // Weighted problem K phi = lambda phi (under the quadrature inner product)
  // is similar to the ordinary symmetric problem for
  // B = W^{1/2} K W^{1/2}; eigenvectors map back through W^{-1/2}.
  Eigen::MatrixXd b = sqrt_w.asDiagonal() * op.kernel() * sqrt_w.asDiagonal();
  b = ((b + b.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed to converge");

  const double tr = op.trace();
  const double raw_min = solver.eigenvalues()(0);
  if (raw_min < -1e-8 * std::max(tr, 0.0))
    throw NumericError("covariance operator is materially non-PSD");

  // Eigen returns ascending order; flip to nonincreasing.
  Eigen::VectorXd values(T);
  Eigen::MatrixXd functions(T, T);
  int clamped = 0;
  for (Eigen::Index j = 0; j < T; ++j) {
    const Eigen::Index src = T - 1 - j;
    double lambda = solver.eigenvalues()(src);
    if (lambda < 0.0) {
      lambda = 0.0;
      ++clamped;
    }
    values(j) = lambda;
    functions.col(j) = solver.eigenvectors().col(src).cwiseQuotient(sqrt_w);
    // Sign rule: the largest-magnitude value of each eigenfunction is
    // positive; the first occurrence decides on ties.
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double mag = std::abs(functions(t, j));
      if (mag > best) {
        best = mag;
        arg = t;
      }
    }
    if (functions(arg, j) < 0.0) functions.col(j) = -functions.col(j);
  }
  return EigenSystem(std::move(values), std::move(functions), op.grid_ptr(),
                     clamped);
}

int truncate_by_fve(const EigenSystem& eig, double threshold) {
  if (!(threshold > 0.0) || !(threshold <= 1.0))
    throw ValidationError("FVE threshold must lie in (0, 1]");
  const double total = eig.values().sum();
  if (!(total > 0.0))
    throw NumericError("operator has zero total variance; FVE undefined");
  double cum = 0.0;
  for (Eigen::Index j = 0; j < eig.values().size(); ++j) {
    cum += eig.values()(j);
    if (cum / total >= threshold) return static_cast<int>(j) + 1;
  }
  return static_cast<int>(eig.values().size());  // threshold == 1 + rounding
}

Eigen::MatrixXd project_dataset(const FunctionalDataset& data,
                                const EigenSystem& eig, int p) {
  require_same_grid(data.grid(), eig.grid());
  if (p < 1 || p > eig.functions().cols())
    throw ValidationError("truncation level out of range");
  // scores(i, j) = sum_t w_t Y_i(t) phi_j(t)
  return data.matrix() * data.grid().weights().asDiagonal() *
         eig.functions().leftCols(p);
}

}  // namespace fcar
