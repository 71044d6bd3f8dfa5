#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"

namespace fcar {

// Which conditional specification the precision matrix follows:
//   kGeneral: Q(eta) = I - eta W        (unnormalized weights)
//   kNested:  Q(rho) = D - rho W        (row-normalized weights, D = diag(w_i+))
enum class Variant { kGeneral, kNested };

// Eigenvalues that determine positive definiteness of the precision matrix,
// computed once per graph:
//   w_eigenvalues:          spectrum of the 0/1 adjacency W, nonincreasing
//   normalized_eigenvalues: spectrum of D^{-1/2} W D^{-1/2}, nonincreasing
//     (empty when some site is isolated, since D is then singular)
struct SpectrumCache {
  Eigen::VectorXd w_eigenvalues;
  Eigen::VectorXd normalized_eigenvalues;
};

// Open interval of dependence parameters for which the precision matrix is
// positive definite, shrunk by a small additive guard at both ends.
struct Interval {
  double lo;
  double hi;
};

// Undirected neighborhood graph over n sites with binary symmetric weights.
// Neighbor lists are sorted, the edge list stores each pair once with
// src < dst, and the adjacency spectrum is computed eagerly at construction
// (analytically for tori, dense otherwise) so that likelihood evaluations
// never re-solve an eigenproblem.
class NeighborhoodGraph {
 public:
  // From symmetric neighbor lists; ids default to "0", "1", ....
  NeighborhoodGraph(std::vector<std::vector<int>> neighbors,
                    std::vector<std::string> ids = {},
                    std::optional<std::pair<int, int>> torus_dims = {});

  int size() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int i) const;
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // w_i+ = number of neighbors of site i.
  const Eigen::VectorXd& row_sums() const { return row_sums_; }
  bool has_isolated() const { return has_isolated_; }

  const std::vector<std::string>& location_ids() const { return ids_; }
  int index_of(const std::string& id) const;

  // Set for graphs built by build_torus; carries (rows, cols).
  const std::optional<std::pair<int, int>>& torus_dims() const {
    return torus_dims_;
  }

  const SpectrumCache& spectrum() const { return spectrum_; }

  Eigen::MatrixXd dense_adjacency() const;

 private:
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::pair<int, int>> edges_;
  Eigen::VectorXd row_sums_;
  std::vector<std::string> ids_;
  std::optional<std::pair<int, int>> torus_dims_;
  bool has_isolated_ = false;
  SpectrumCache spectrum_;
};

// rows x cols torus with 4-nearest-neighbor adjacency and wraparound.
// Requires rows >= 3 and cols >= 3 so that no pair is doubly adjacent.
// Site (r, c) gets index r * cols + c and id "r_c".
NeighborhoodGraph build_torus(int rows, int cols);

// Graph from an undirected edge list on n sites. Edges may appear in either
// orientation and repeats are collapsed; self-loops are rejected, as are
// endpoints outside [0, n). `ids`, when given, must hold n distinct names.
NeighborhoodGraph build_from_edge_list(
    int n, const std::vector<std::pair<int, int>>& edges,
    std::vector<std::string> ids = {});

// Accessor mirroring the graph's eagerly computed spectrum.
const SpectrumCache& normalized_spectrum(const NeighborhoodGraph& graph);

// Dependence parameters keeping Q positive definite, from the cached
// spectrum: (1/s_min, 1/s_max) with s the adjacency spectrum (general) or
// the normalized spectrum (nested), each end pulled in by 1e-6. Throws
// ValidationError when no valid open interval exists (e.g. edgeless graph,
// or nested variant with an isolated site, whose normalized spectrum is
// unavailable).
Interval admissible_interval(const SpectrumCache& cache, Variant variant);
Interval admissible_interval(const NeighborhoodGraph& graph, Variant variant);

}  // namespace fcar
