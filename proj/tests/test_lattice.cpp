#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcar/lattice.hpp"
#include "oracles.hpp"

using namespace fcar;

namespace {

std::vector<double> sorted_desc(Eigen::VectorXd v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

NeighborhoodGraph ring4() {
  return build_from_edge_list(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("torus construction gives a 4-regular graph") {
  const NeighborhoodGraph g3 = build_torus(3, 3);
  CHECK(g3.size() == 9);
  CHECK(g3.edges().size() == 18);
  for (Eigen::Index i = 0; i < 9; ++i) CHECK(g3.row_sums()(i) == 4.0);

  const NeighborhoodGraph g10 = build_torus(10, 10);
  CHECK(g10.size() == 100);
  CHECK(g10.edges().size() == 200);
  CHECK(g10.row_sums().minCoeff() == 4.0);
  CHECK(g10.row_sums().maxCoeff() == 4.0);
  CHECK_FALSE(g10.has_isolated());
  CHECK(g10.torus_dims().has_value());
}

TEST_CASE("torus wrap-around neighbors") {
  const NeighborhoodGraph g = build_torus(4, 4);
  // Site (0,0) in a 4x4 torus: east (0,1)=1, west (0,3)=3, south (1,0)=4,
  // north wraps to (3,0)=12.
  const std::vector<int> expected{1, 3, 4, 12};
  CHECK(g.neighbors(0) == expected);
  CHECK(g.location_ids()[0] == "0_0");
  CHECK(g.location_ids()[5] == "1_1");
}

TEST_CASE("torus requires both dimensions at least three") {
  CHECK_THROWS_AS(build_torus(2, 5), ValidationError);
  CHECK_THROWS_AS(build_torus(5, 2), ValidationError);
  CHECK_THROWS_AS(build_torus(0, 0), ValidationError);
}

TEST_CASE("edge-list construction sums rows and dedupes") {
  const NeighborhoodGraph ring = ring4();
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(ring.row_sums()(i) == 2.0);
  CHECK(ring.edges().size() == 4);

  const NeighborhoodGraph duped =
      build_from_edge_list(3, {{0, 1}, {1, 0}, {0, 1}, {1, 2}});
  CHECK(duped.edges().size() == 2);
  CHECK(duped.row_sums()(1) == 2.0);

  CHECK_THROWS_AS(build_from_edge_list(3, {{0, 0}}), ValidationError);
  CHECK_THROWS_AS(build_from_edge_list(3, {{0, 3}}), ValidationError);
  CHECK_THROWS_AS(build_from_edge_list(0, {}), ValidationError);
}

TEST_CASE("isolated vertices are accepted but flagged") {
  const NeighborhoodGraph g = build_from_edge_list(4, {{0, 1}, {1, 2}});
  CHECK(g.has_isolated());
  CHECK(g.row_sums()(3) == 0.0);
  // Normalized spectrum is undefined with an isolated site.
  CHECK(g.spectrum().normalized_eigenvalues.size() == 0);
  CHECK_THROWS_AS(admissible_interval(g, Variant::kNested), ValidationError);
}

TEST_CASE("ring-of-four adjacency spectrum is {2, 0, 0, -2}") {
  const NeighborhoodGraph ring = ring4();
  const std::vector<double> w = sorted_desc(ring.spectrum().w_eigenvalues);
  CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(w[1]) < 1e-12);
  CHECK(std::abs(w[2]) < 1e-12);
  CHECK(w[3] == doctest::Approx(-2.0).epsilon(1e-12));

  const std::vector<double> mu = sorted_desc(ring.spectrum().normalized_eigenvalues);
  CHECK(mu[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu[3] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("3x3 torus spectrum is {4, 1 (x4), -2 (x4)}") {
  const NeighborhoodGraph g = build_torus(3, 3);
  const std::vector<double> w = sorted_desc(g.spectrum().w_eigenvalues);
  CHECK(w[0] == doctest::Approx(4.0).epsilon(1e-9));
  for (int i = 1; i <= 4; ++i) CHECK(w[i] == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 5; i <= 8; ++i)
    CHECK(w[i] == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("analytic torus spectra agree with dense eigensolves") {
  for (auto [rows, cols] : std::vector<std::pair<int, int>>{
           {3, 3}, {3, 4}, {4, 4}, {5, 5}, {3, 7}}) {
    const NeighborhoodGraph g = build_torus(rows, cols);
    const Eigen::VectorXd dense =
        oracle::dense_spectrum(g.dense_adjacency());
    const std::vector<double> analytic =
        sorted_desc(g.spectrum().w_eigenvalues);
    REQUIRE(static_cast<Eigen::Index>(analytic.size()) == dense.size());
    for (Eigen::Index i = 0; i < dense.size(); ++i)
      CHECK(analytic[static_cast<std::size_t>(i)] ==
            doctest::Approx(dense(i)).epsilon(1e-8));
  }
}

TEST_CASE("adjacency spectra satisfy trace identities") {
  for (const NeighborhoodGraph& g :
       {build_torus(4, 5), ring4(), build_torus(3, 3)}) {
    const Eigen::VectorXd& w = g.spectrum().w_eigenvalues;
    // Zero diagonal: eigenvalues sum to zero.
    CHECK(std::abs(w.sum()) < 1e-8);
    // Sum of squares counts walks of length two: 2 * (number of edges).
    CHECK(w.squaredNorm() ==
          doctest::Approx(2.0 * static_cast<double>(g.edges().size()))
              .epsilon(1e-8));
    const Eigen::VectorXd& mu = g.spectrum().normalized_eigenvalues;
    CHECK(mu.maxCoeff() <= 1.0 + 1e-10);
    CHECK(mu.minCoeff() >= -1.0 - 1e-10);
    CHECK(mu.maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("torus edges round-trip through the edge-list builder") {
  const NeighborhoodGraph g = build_torus(3, 4);
  const NeighborhoodGraph back = build_from_edge_list(g.size(), g.edges());
  REQUIRE(back.size() == g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    CHECK(back.neighbors(i) == g.neighbors(i));
  CHECK(back.edges() == g.edges());
}

TEST_CASE("admissible interval for the 10x10 torus general model") {
  const NeighborhoodGraph g = build_torus(10, 10);
  const Interval iv = admissible_interval(g, Variant::kGeneral);
  // Extreme adjacency eigenvalues are +/-4, so the open interval is
  // (-1/4, 1/4) shrunk by the numerical guard.
  CHECK(iv.lo == doctest::Approx(-0.25 + 1e-6).epsilon(1e-9));
  CHECK(iv.hi == doctest::Approx(0.25 - 1e-6).epsilon(1e-9));
}

TEST_CASE("admissible interval for the nested ring model") {
  const Interval iv = admissible_interval(ring4(), Variant::kNested);
  CHECK(iv.lo == doctest::Approx(-1.0 + 1e-6).epsilon(1e-9));
  CHECK(iv.hi == doctest::Approx(1.0 - 1e-6).epsilon(1e-9));
}

TEST_CASE("admissible interval for the 3x3 torus general model") {
  const Interval iv = admissible_interval(build_torus(3, 3), Variant::kGeneral);
  CHECK(iv.lo == doctest::Approx(-0.5 + 1e-6).epsilon(1e-9));
  CHECK(iv.hi == doctest::Approx(0.25 - 1e-6).epsilon(1e-9));
}

TEST_CASE("edgeless graphs have no admissible interval") {
  const NeighborhoodGraph g(std::vector<std::vector<int>>(3));
  CHECK(g.has_isolated());
  CHECK_THROWS_AS(admissible_interval(g, Variant::kGeneral), ValidationError);
}

TEST_CASE("graph construction validates neighbor lists") {
  // Asymmetric neighbor relation.
  CHECK_THROWS_AS(NeighborhoodGraph(std::vector<std::vector<int>>{{1}, {}}), ValidationError);
  // Self-loop.
  CHECK_THROWS_AS(NeighborhoodGraph(std::vector<std::vector<int>>{{0}}), ValidationError);
  // Duplicate neighbor entry.
  CHECK_THROWS_AS(NeighborhoodGraph(std::vector<std::vector<int>>{{1, 1}, {0, 0}}), ValidationError);
  // Mismatched id count.
  CHECK_THROWS_AS(NeighborhoodGraph(std::vector<std::vector<int>>{{1}, {0}}, {"only"}), ValidationError);
  // Duplicate ids.
  CHECK_THROWS_AS(NeighborhoodGraph(std::vector<std::vector<int>>{{1}, {0}}, {"x", "x"}), ValidationError);
}

TEST_CASE("index_of resolves ids") {
  const NeighborhoodGraph g = build_torus(3, 3);
  CHECK(g.index_of("2_1") == 7);
  CHECK_THROWS_AS(g.index_of("9_9"), ValidationError);
}

}  // TEST_SUITE
