#include "fcar/lattice.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fcar {

namespace {

constexpr double kBoundaryGuard = 1e-6;
constexpr double kPi = 3.14159265358979323846;

// Spectrum of the 4-neighbor torus adjacency in closed form: the lattice
// Fourier modes give nu_{k,l} = 2 cos(2 pi k / rows) + 2 cos(2 pi l / cols).
// The normalized matrix D^{-1/2} W D^{-1/2} is W / 4 on a torus.
Eigen::VectorXd torus_adjacency_spectrum(int rows, int cols) {
  Eigen::VectorXd nu(static_cast<Eigen::Index>(rows) * cols);
  Eigen::Index at = 0;
  for (int k = 0; k < rows; ++k)
    for (int l = 0; l < cols; ++l)
      nu(at++) = 2.0 * std::cos(2.0 * kPi * k / rows) +
                 2.0 * std::cos(2.0 * kPi * l / cols);
  std::sort(nu.data(), nu.data() + nu.size(), std::greater<double>());
  return nu;
}

Eigen::VectorXd sorted_desc(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

SpectrumCache compute_spectrum(const NeighborhoodGraph& g) {
  SpectrumCache cache;
  if (g.torus_dims()) {
    const auto [rows, cols] = *g.torus_dims();
    cache.w_eigenvalues = torus_adjacency_spectrum(rows, cols);
    cache.normalized_eigenvalues = cache.w_eigenvalues / 4.0;
    return cache;
  }
  const Eigen::MatrixXd w = g.dense_adjacency();
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w);
    if (solver.info() != Eigen::Success)
      throw NumericError("adjacency eigendecomposition failed");
    cache.w_eigenvalues = sorted_desc(solver.eigenvalues());
  }
  if (!g.has_isolated()) {
    const Eigen::VectorXd d_inv_sqrt = g.row_sums().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd m = d_inv_sqrt.asDiagonal() * w * d_inv_sqrt.asDiagonal();
    m = ((m + m.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
      throw NumericError("normalized adjacency eigendecomposition failed");
    cache.normalized_eigenvalues = sorted_desc(solver.eigenvalues());
  }
  return cache;
}

}  // namespace

NeighborhoodGraph::NeighborhoodGraph(
    std::vector<std::vector<int>> neighbors, std::vector<std::string> ids,
    std::optional<std::pair<int, int>> torus_dims)
    : neighbors_(std::move(neighbors)), ids_(std::move(ids)),
      torus_dims_(torus_dims) {
  const int n = static_cast<int>(neighbors_.size());
  if (n < 1) throw ValidationError("graph needs at least one site");

  row_sums_.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& list = neighbors_[i];
    std::sort(list.begin(), list.end());
    for (std::size_t k = 0; k < list.size(); ++k) {
      const int j = list[k];
      if (j < 0 || j >= n)
        throw ValidationError("neighbor index out of range");
      if (j == i) throw ValidationError("self-loop in neighborhood graph");
      if (k > 0 && list[k - 1] == j)
        throw ValidationError("duplicate neighbor entry");
      if (j > i) edges_.emplace_back(i, j);
    }
    row_sums_(i) = static_cast<double>(list.size());
    if (list.empty()) has_isolated_ = true;
  }
  // Symmetry: every stored edge must appear from both endpoints.
  for (const auto& [i, j] : edges_) {
    const auto& back = neighbors_[j];
    if (!std::binary_search(back.begin(), back.end(), i))
      throw ValidationError("asymmetric neighbor lists");
  }
  std::sort(edges_.begin(), edges_.end());

  if (ids_.empty()) {
    ids_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids_.push_back(std::to_string(i));
  }
  if (static_cast<int>(ids_.size()) != n)
    throw ValidationError("location id count does not match graph size");
  std::set<std::string> seen;
  for (const auto& id : ids_)
    if (!seen.insert(id).second)
      throw ValidationError("duplicate location id: " + id);

  spectrum_ = compute_spectrum(*this);
}

const std::vector<int>& NeighborhoodGraph::neighbors(int i) const {
  if (i < 0 || i >= size()) throw ValidationError("site index out of range");
  return neighbors_[static_cast<std::size_t>(i)];
}

int NeighborhoodGraph::index_of(const std::string& id) const {
  for (int i = 0; i < size(); ++i)
    if (ids_[static_cast<std::size_t>(i)] == id) return i;
  throw ValidationError("unknown location id: " + id);
}

Eigen::MatrixXd NeighborhoodGraph::dense_adjacency() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size(), size());
  for (const auto& [i, j] : edges_) {
    w(i, j) = 1.0;
    w(j, i) = 1.0;
  }
  return w;
}

NeighborhoodGraph build_torus(int rows, int cols) {
  if (rows < 3 || cols < 3)
    throw ValidationError(
        "torus dimensions must be at least 3 (shorter axes duplicate edges)");
  const int n = rows * cols;
  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  auto at = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = at(r, c);
      neighbors[static_cast<std::size_t>(i)] = {
          at((r + rows - 1) % rows, c), at((r + 1) % rows, c),
          at(r, (c + cols - 1) % cols), at(r, (c + 1) % cols)};
      ids[static_cast<std::size_t>(i)] =
          std::to_string(r) + "_" + std::to_string(c);
    }
  }
  return NeighborhoodGraph(std::move(neighbors), std::move(ids),
                           std::make_pair(rows, cols));
}

NeighborhoodGraph build_from_edge_list(
    int n, const std::vector<std::pair<int, int>>& edges,
    std::vector<std::string> ids) {
  if (n < 1) throw ValidationError("graph needs at least one site");
  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      std::ostringstream os;
      os << "edge endpoint out of range: (" << a << ", " << b << ")";
      throw ValidationError(os.str());
    }
    if (a == b) throw ValidationError("self-loop in edge list");
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;  // collapse repeats
    neighbors[static_cast<std::size_t>(a)].push_back(b);
    neighbors[static_cast<std::size_t>(b)].push_back(a);
  }
  return NeighborhoodGraph(std::move(neighbors), std::move(ids));
}

const SpectrumCache& normalized_spectrum(const NeighborhoodGraph& graph) {
  return graph.spectrum();
}

Interval admissible_interval(const SpectrumCache& cache, Variant variant) {
  const Eigen::VectorXd& s = variant == Variant::kGeneral
                                 ? cache.w_eigenvalues
                                 : cache.normalized_eigenvalues;
  if (s.size() == 0)
    throw ValidationError(
        "nested variant needs all row sums positive (isolated site present)");
  const double s_max = s(0);
  const double s_min = s(s.size() - 1);
  // 1 - d * s_i > 0 for all i demands d < 1/s_max and d > 1/s_min;
  // a graph with edges always has s_max > 0 > s_min (trace of W is zero).
  if (!(s_max > 0.0) || !(s_min < 0.0))
    throw ValidationError(
        "no valid dependence interval: adjacency spectrum is degenerate "
        "(graph has no edges)");
  const Interval interval{1.0 / s_min + kBoundaryGuard,
                          1.0 / s_max - kBoundaryGuard};
  if (!(interval.lo < interval.hi))
    throw ValidationError("admissible dependence interval is empty");
  return interval;
}

Interval admissible_interval(const NeighborhoodGraph& graph, Variant variant) {
  return admissible_interval(graph.spectrum(), variant);
}

}  // namespace fcar
