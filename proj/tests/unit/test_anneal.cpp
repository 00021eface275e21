#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msform/anneal.hpp"
#include "msform/error.hpp"
#include "msform/metrics.hpp"
#include "support/oracles.hpp"

using namespace msform;

namespace {

// 10 x 10 cell centers of the unit square.
SamplePointSet unit_square() {
  std::vector<Vec> pts;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) pts.emplace_back(0.05 + 0.1 * x, 0.05 + 0.1 * y);
  }
  return SamplePointSet::from_points(2, pts, 0.1);
}

double largest_spread(const std::vector<Vec>& p) {
  double worst = 0.0;
  for (const auto& a : p) {
    for (const auto& b : p) worst = std::max(worst, dist(a, b));
  }
  return worst;
}

}  // namespace

TEST_CASE("e_step") {
  oracle::Gen gen(51);
  for (int trial = 0; trial < 100; ++trial) {
    const auto robots = gen.points(gen.index(1, 8), 0, 1);
    const auto samples = gen.points(gen.index(1, 30), 0, 1);
    const double beta = std::pow(10.0, gen.uniform(-2, 2));
    const Matrix a = e_step(robots, samples, beta);
    REQUIRE(a.rows() == samples.size());
    REQUIRE(a.cols() == robots.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < robots.size(); ++i) {
        CHECK(a(k, i) >= 0.0);
        s += a(k, i);
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
  SUBCASE("equidistant pair shares evenly") {
    const Matrix a = e_step(std::vector<Vec>{{-1, 0}, {1, 0}}, std::vector<Vec>{{0, 3}}, 2.0);
    CHECK(a(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("far sample falls back to uniform") {
    std::size_t under = 0;
    const Matrix a = e_step(std::vector<Vec>{{0, 0}, {0.1, 0}}, std::vector<Vec>{{1e4, 0}}, 100.0,
                            default_exec(), &under);
    CHECK(a(0, 0) + a(0, 1) == doctest::Approx(1.0));
    CHECK(std::isfinite(a(0, 0)));
  }
}

TEST_CASE("m_step") {
  oracle::Gen gen(52);
  SUBCASE("single robot goes to the sample mean") {
    const auto q = gen.points(17, -2, 2);
    const Matrix a = e_step(std::vector<Vec>{{5, 5}}, q, 0.3);
    const auto p = m_step(q, a, std::vector<Vec>{{5, 5}});
    Vec mean;
    for (const auto& x : q) mean += x;
    mean = mean / 17.0;
    CHECK(dist(p[0], mean) < 1e-14);
  }
  SUBCASE("uniform associations give the centroid") {
    const auto q = gen.points(9, 0, 3);
    Matrix a(9, 3);
    for (auto& x : a.data()) x = 1.0 / 3.0;
    const auto p = m_step(q, a, gen.points(3, 0, 1));
    Vec mean;
    for (const auto& x : q) mean += x;
    mean = mean / 9.0;
    for (const auto& x : p) CHECK(dist(x, mean) < 1e-14);
  }
  SUBCASE("property: outputs lie in the hull of the samples") {
    for (int trial = 0; trial < 200; ++trial) {
      const auto q = gen.points(gen.index(1, 25), -1, 1);
      const auto robots = gen.points(gen.index(1, 6), -3, 3);
      const Matrix a = e_step(robots, q, gen.uniform(0.01, 50));
      const auto p = m_step(q, a, robots);
      const auto hull = oracle::convex_hull(q);
      for (std::size_t i = 0; i < p.size(); ++i) {
        double w = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) w += a(k, i);
        if (w > 0.0) {
          CHECK(oracle::hull_distance(hull, p[i]) < 1e-12);
        } else {
          CHECK(p[i] == robots[i]);
        }
      }
    }
  }
  SUBCASE("unassociated robot keeps its place") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 0) = 1.0;
    const auto p = m_step(std::vector<Vec>{{0, 0}, {2, 0}}, a, std::vector<Vec>{{9, 9}, {7, 7}});
    CHECK(p[0] == Vec{1, 0});
    CHECK(p[1] == Vec{7, 7});
  }
}

TEST_CASE("critical bandwidth of the first split") {
  // Collapsed robots at the centroid become unstable once beta exceeds
  // 1 / (2 lambda_max), lambda_max the largest eigenvalue of the sample covariance.
  const auto set = unit_square();
  const double var = 0.01 * (100.0 - 1.0) / 12.0;
  const double beta_c = 1.0 / (2.0 * var);
  AnnealConfig cfg;
  cfg.epsilon_a = 1e-12;
  cfg.max_inner_iterations = 200000;
  std::vector<Vec> start{{0.5 + 1e-4, 0.5}, {0.5 - 1e-4, 0.5 + 2e-5}, {0.5, 0.5 - 1e-4}};

  const auto below = anneal_inner(set.points_local, start, 0.8 * beta_c, cfg);
  CHECK(largest_spread(below.positions) < 1e-6);
  const auto above = anneal_inner(set.points_local, start, 1.5 * beta_c, cfg);
  CHECK(largest_spread(above.positions) > 0.1);
}

TEST_CASE("anneal_beta") {
  const auto set = unit_square();
  SUBCASE("one robot or no separation needed") {
    AnnealConfig cfg;
    cfg.d_min = 0.3;
    auto r = anneal_beta(set, 1, cfg);
    CHECK(r.accepted);
    CHECK(r.beta == cfg.beta_initial);
    CHECK(r.rounds == 1);
    cfg.d_min = 0.0;
    r = anneal_beta(set, 4, cfg);
    CHECK(r.beta == cfg.beta_initial);
  }
  SUBCASE("four robots, d_min 0.3") {
    AnnealConfig cfg;
    cfg.d_min = 0.3;
    const auto r = anneal_beta(set, 4, cfg);
    REQUIRE(r.accepted);
    INFO("beta=" << r.beta << " rounds=" << r.rounds);
    CHECK(r.min_distance >= 0.3);
    CHECK(r.min_distance == min_pairwise_distance(r.positions));
    // on the geometric schedule
    double b = cfg.beta_initial;
    for (std::size_t k = 1; k < r.rounds; ++k) b *= cfg.alpha_c;
    CHECK(r.beta == b);
    // separation needs the collapsed state to have split
    const double beta_c = 1.0 / (2.0 * 0.01 * 99.0 / 12.0);
    CHECK(r.beta > beta_c);
    // the returned placement is a fixed point that still meets d_min
    AnnealConfig tight = cfg;
    tight.epsilon_a = 1e-10;
    const auto again = anneal_inner(set.points_local, r.positions, r.beta, tight);
    CHECK(min_pairwise_distance(again.positions) >= 0.3 - 1e-3);
    oracle::Gen gen(53);
    std::vector<Vec> nudged = r.positions;
    for (auto& p : nudged) p += gen.point(-1e-3, 1e-3);
    const auto from_nudged = anneal_inner(set.points_local, nudged, r.beta, tight);
    CHECK(min_pairwise_distance(from_nudged.positions) >= 0.3 - 1e-3);
    // deterministic
    CHECK(anneal_beta(set, 4, cfg).positions == r.positions);
  }
  SUBCASE("unreachable separation reports the schedule end") {
    AnnealConfig cfg;
    cfg.d_min = 5.0;
    cfg.beta_final = 20.0;
    const auto r = anneal_beta(set, 3, cfg);
    CHECK_FALSE(r.accepted);
    CHECK(r.beta == cfg.beta_final);
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("bad schedules") {
    AnnealConfig cfg;
    cfg.alpha_c = 1.0;
    CHECK_THROWS_AS(anneal_beta(set, 2, cfg), ConfigError);
    cfg = {};
    cfg.beta_final = 0.001;
    CHECK_THROWS_AS(anneal_beta(set, 2, cfg), ConfigError);
    cfg = {};
    CHECK_THROWS_AS(anneal_beta(set, 0, cfg), ConfigError);
  }
}
