#pragma once

// Test-only reference implementations. Everything here is deliberately
// slow, dense and direct -- independent code paths against which the
// library's sparse/cached implementations are checked.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "fcar/lattice.hpp"
#include "fcar/rng.hpp"

namespace oracle {

// Adaptive Simpson quadrature with absolute tolerance `tol`.
inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fb, double fm,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fb, fm, whole, tol, 48);
}

// Dense precision matrix Q = I - dep*W (general) or D - dep*W (nested).
inline Eigen::MatrixXd dense_precision(const fcar::NeighborhoodGraph& graph,
                                       fcar::Variant variant,
                                       double dependence) {
  const Eigen::MatrixXd w = graph.dense_adjacency();
  if (variant == fcar::Variant::kGeneral)
    return Eigen::MatrixXd::Identity(graph.size(), graph.size()) -
           dependence * w;
  return Eigen::MatrixXd(graph.row_sums().asDiagonal()) - dependence * w;
}

// log det of a symmetric positive definite matrix via Cholesky.
inline double dense_log_det(const Eigen::MatrixXd& m) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("oracle: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// The projected log-likelihood evaluated the expensive way: materialize
// Sigma = Q^{-1}, then for each score column assemble the exact Gaussian
// log-density ingredients of N(0, lambda_j * Sigma) with dense Cholesky
// factorizations. Mirrors the textbook formula
//   -(2n)^{-1} sum_j [ y_j' Sigma^{-1} y_j / lambda_j + log det(lambda_j Sigma) ].
inline double dense_projected_loglik(const Eigen::MatrixXd& scores,
                                     const Eigen::VectorXd& eigenvalues,
                                     const fcar::NeighborhoodGraph& graph,
                                     fcar::Variant variant,
                                     double dependence) {
  const Eigen::Index n = scores.rows();
  const Eigen::MatrixXd sigma =
      dense_precision(graph, variant, dependence).inverse();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    const Eigen::MatrixXd cov = eigenvalues(j) * sigma;
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("oracle: projection covariance not PD");
    const Eigen::VectorXd solved = llt.solve(scores.col(j));
    acc += scores.col(j).dot(solved) + dense_log_det(cov);
  }
  return -acc / (2.0 * static_cast<double>(n));
}

// Exact draw from the nested joint law: component scores for eigenvalue
// lambda_j have covariance lambda_j * (D - rho W)^{-1}; curves are
// sum_j scores_j phi_j'. Sampling goes through the Cholesky factor of the
// precision (y = sqrt(lambda) * L^{-T} z), never through the model code.
inline Eigen::MatrixXd exact_nested_sample(const fcar::NeighborhoodGraph& graph,
                                           double rho,
                                           const Eigen::VectorXd& lambdas,
                                           const Eigen::MatrixXd& basis,
                                           fcar::RngStream& rng) {
  const Eigen::Index n = graph.size();
  const Eigen::MatrixXd q =
      dense_precision(graph, fcar::Variant::kNested, rho);
  const Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("oracle: precision not PD");
  Eigen::MatrixXd curves = Eigen::MatrixXd::Zero(n, basis.rows());
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    const Eigen::VectorXd y =
        std::sqrt(lambdas(j)) *
        llt.matrixU().solve(z);  // U = L', so U^{-1} z has covariance Q^{-1}
    curves += y * basis.col(j).transpose();
  }
  return curves;
}

// Brute-force double sum for the squared HS distance.
inline double hs_distance_bruteforce(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& weights) {
  double acc = 0.0;
  for (Eigen::Index s = 0; s < a.rows(); ++s)
    for (Eigen::Index u = 0; u < a.cols(); ++u) {
      const double d = a(s, u) - b(s, u);
      acc += weights(s) * weights(u) * d * d;
    }
  return std::sqrt(acc);
}

// Dense symmetric eigenvalues, descending.
inline Eigen::VectorXd dense_spectrum(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd v = solver.eigenvalues();
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

}  // namespace oracle
