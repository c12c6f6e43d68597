#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/rank_oracle.hpp"
#include "tropitest/error.hpp"
#include "tropitest/persistence.hpp"
#include "tropitest/synthgeo.hpp"

using namespace tropitest;
using namespace tropitest::persistence;
using synthgeo::DistanceMatrix;
using synthgeo::PointCloud;

namespace {

DistanceMatrix square() {
  return synthgeo::pairwise_distances(PointCloud(2, {0, 0, 1, 0, 1, 1, 0, 1}));
}

std::vector<std::vector<double>> rows_of(const DistanceMatrix& dm) {
  std::vector<std::vector<double>> out(dm.size(), std::vector<double>(dm.size()));
  for (std::size_t i = 0; i < dm.size(); ++i)
    for (std::size_t j = 0; j < dm.size(); ++j) out[i][j] = dm(i, j);
  return out;
}

int bars_alive(const Barcode& bc, double s, double t) {
  int c = 0;
  for (const auto& b : bc.bars)
    if (b.birth() <= s && b.death() > t) ++c;
  return c;
}

}  // namespace

TEST(Filtration, TwoPoints) {
  const auto f = build_rips_filtration(DistanceMatrix(2, {0, 3, 3, 0}), 1, 5.0);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f.dim(0), 0);
  EXPECT_EQ(f.scale(0), 0.0);
  EXPECT_EQ(f.dim(1), 0);
  EXPECT_EQ(f.dim(2), 1);
  EXPECT_EQ(f.scale(2), 3.0);
}

TEST(Filtration, EdgeBeyondMaxScaleIsExcluded) {
  const auto f = build_rips_filtration(DistanceMatrix(2, {0, 3, 3, 0}), 1, 2.0);
  EXPECT_EQ(f.count(1), 0u);
}

TEST(Filtration, EquilateralTriangle) {
  const auto f = build_rips_filtration(DistanceMatrix(3, {0, 1, 1, 1, 0, 1, 1, 1, 0}), 2, 2.0);
  ASSERT_EQ(f.count(2), 1u);
  EXPECT_EQ(f.dim(f.size() - 1), 2);
  EXPECT_EQ(f.scale(f.size() - 1), 1.0);
}

TEST(Filtration, UnitSquareCounts) {
  const double s = std::sqrt(2.0);
  for (int max_dim : {2, 3}) {
    const auto f = build_rips_filtration(square(), max_dim, 2.0);
    std::size_t unit_edges = 0, long_edges = 0, triangles = 0, tets = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.dim(i) == 1 && f.scale(i) == 1.0) ++unit_edges;
      if (f.dim(i) == 1 && f.scale(i) == s) ++long_edges;
      if (f.dim(i) == 2 && f.scale(i) == s) ++triangles;
      if (f.dim(i) == 3 && f.scale(i) == s) ++tets;
    }
    EXPECT_EQ(unit_edges, 4u);
    EXPECT_EQ(long_edges, 2u);
    EXPECT_EQ(triangles, 4u);
    EXPECT_EQ(tets, max_dim == 3 ? 1u : 0u);
  }
}

TEST(Filtration, OrderRefinesFaces) {
  const auto pc = synthgeo::sample_shape(synthgeo::ShapeSpec::circle(1), 12, 0.1, 4);
  const auto f = build_rips_filtration(synthgeo::pairwise_distances(pc), 3, 10.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto faces = f.boundary(i);
    EXPECT_EQ(faces.size(), f.dim(i) == 0 ? 0u : static_cast<std::size_t>(f.dim(i) + 1));
    for (std::size_t face : faces) {
      EXPECT_LT(face, i);
      EXPECT_EQ(f.dim(face), f.dim(i) - 1);
      EXPECT_LE(f.scale(face), f.scale(i));
    }
    if (i > 0) {
      EXPECT_LE(f.scale(i - 1), f.scale(i));
    }
  }
}

TEST(Filtration, RejectsBadParameters) {
  EXPECT_THROW(build_rips_filtration(square(), -1, 1.0), ParameterError);
  EXPECT_THROW(build_rips_filtration(square(), 2, 0.0), ParameterError);
  EXPECT_THROW(build_rips_filtration(square(), 2, NAN), ParameterError);
}

TEST(Barcode, TwoPointsDimZero) {
  const double delta = 0.75, M = 4.0;
  const auto f = build_rips_filtration(DistanceMatrix(2, {0, delta, delta, 0}), 1, M);
  const auto bc = compute_barcode(f, 0, EssentialPolicy::kTruncate);
  ASSERT_EQ(bc.size(), 2u);
  EXPECT_EQ(bc.bars[0], Bar::from_birth_death(0, delta));
  EXPECT_EQ(bc.bars[1], Bar::from_birth_death(0, M));

  const auto dropped = compute_barcode(f, 0, EssentialPolicy::kDrop);
  ASSERT_EQ(dropped.size(), 1u);
  EXPECT_EQ(dropped.bars[0], Bar::from_birth_death(0, delta));
}

TEST(Barcode, UnitSquareLoop) {
  const auto bc = compute_barcode(build_rips_filtration(square(), 2, 2.0), 1);
  ASSERT_EQ(bc.size(), 1u);
  EXPECT_NEAR(bc.bars[0].birth(), 1.0, 1e-12);
  EXPECT_NEAR(bc.bars[0].death(), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(bc.homology_dim, 1);
}

TEST(Barcode, DimZeroCountsPoints) {
  for (std::size_t k = 1; k <= 30; ++k) {
    const auto pc = synthgeo::sample_shape(synthgeo::ShapeSpec::cluster_blob(1.0), k, 0.0, k);
    const auto dm = synthgeo::pairwise_distances(pc);
    const double M = std::max(dm.enclosing_radius(), 1.0);
    const auto bc = compute_barcode(build_rips_filtration(dm, 1, M), 0);
    EXPECT_EQ(bc.size(), k);
    for (const auto& b : bc.bars) EXPECT_EQ(b.birth(), 0.0);
  }
}

TEST(Barcode, HomologyDimMustBeBelowMaxDim) {
  const auto f = build_rips_filtration(square(), 1, 2.0);
  EXPECT_THROW(compute_barcode(f, 1), ConfigurationError);
  EXPECT_THROW(compute_barcode(f, -1), ConfigurationError);
}

TEST(Barcode, CircleHasOneLongLoop) {
  const auto pc = synthgeo::sample_shape(synthgeo::ShapeSpec::circle(1), 50, 0.0, 8);
  const auto dm = synthgeo::pairwise_distances(pc);
  const auto bc = compute_barcode(build_rips_filtration(dm, 2, dm.enclosing_radius()), 1);
  int long_bars = 0;
  for (const auto& b : bc.bars)
    if (b.persistence() > 1.0) ++long_bars;
  EXPECT_EQ(long_bars, 1);
}

TEST(Barcode, RanksMatchGaussianEliminationOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(3, 7);
  std::uniform_real_distribution<double> coord(0, 1);
  int instances = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const int k = size(rng);
    std::vector<double> xs;
    for (int i = 0; i < 2 * k; ++i) xs.push_back(coord(rng));
    const auto dm = synthgeo::pairwise_distances(PointCloud(2, xs));
    const oracle::RipsRanks ranks(rows_of(dm));
    const auto scales = ranks.scales();
    const double M = scales.back() + 1.0;
    for (int d : {0, 1}) {
      const auto bc = compute_barcode(build_rips_filtration(dm, d + 1, M), d);
      for (std::size_t a = 0; a < scales.size(); ++a)
        for (std::size_t b = a; b < scales.size(); ++b)
          ASSERT_EQ(bars_alive(bc, scales[a], scales[b]),
                    ranks.persistent_betti(d, scales[a], scales[b]))
              << "trial " << trial << " dim " << d << " s " << scales[a] << " t " << scales[b];
    }
    ++instances;
  }
  EXPECT_GE(instances, 200);
}

TEST(Barcode, DimTwoMatchesOracleOnOctahedron) {
  // Six points at +-e_i: a 2-sphere at scale sqrt2 that fills at 2.
  std::vector<double> xs;
  for (int axis = 0; axis < 3; ++axis)
    for (double sign : {1.0, -1.0}) {
      double p[3] = {0, 0, 0};
      p[axis] = sign;
      xs.insert(xs.end(), p, p + 3);
    }
  const auto dm = synthgeo::pairwise_distances(PointCloud(3, xs));
  const auto bc = compute_barcode(build_rips_filtration(dm, 3, 3.0), 2);
  ASSERT_EQ(bc.size(), 1u);
  EXPECT_NEAR(bc.bars[0].birth(), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(bc.bars[0].death(), 2.0, 1e-12);
  const oracle::RipsRanks ranks(rows_of(dm));
  EXPECT_EQ(ranks.persistent_betti(2, std::sqrt(2.0), std::sqrt(2.0)), 1);
  EXPECT_EQ(ranks.persistent_betti(2, 2.0, 2.0), 0);
}
