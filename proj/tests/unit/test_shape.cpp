#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "msform/error.hpp"
#include "msform/shape.hpp"
#include "support/oracles.hpp"

using namespace msform;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("msform_shape_" + name);
  std::ofstream(p) << body;
  return p;
}

// Brute-force grid enumeration: every cell center of the bounding-box grid
// tested against the oracle point-in-polygon.
std::vector<Vec> enumerate_grid(const std::vector<Vec>& poly, double h) {
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& v : poly) {
    x0 = std::min(x0, v[0]);
    y0 = std::min(y0, v[1]);
    x1 = std::max(x1, v[0]);
    y1 = std::max(y1, v[1]);
  }
  std::vector<Vec> out;
  for (int iy = 0; y0 + (iy + 0.5) * h <= y1; ++iy) {
    for (int ix = 0; x0 + (ix + 0.5) * h <= x1; ++ix) {
      const Vec c{x0 + (ix + 0.5) * h, y0 + (iy + 0.5) * h};
      if (oracle::in_polygon(poly, c)) out.push_back(c);
    }
  }
  return out;
}

bool same_set(std::vector<Vec> a, std::vector<Vec> b, double tol) {
  if (a.size() != b.size()) return false;
  auto less = [](const Vec& u, const Vec& v) { return u[1] < v[1] || (u[1] == v[1] && u[0] < v[0]); };
  std::sort(a.begin(), a.end(), less);
  std::sort(b.begin(), b.end(), less);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (dist(a[i], b[i]) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("unit square at half spacing gives four cell centers") {
  const Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  const auto set = discretize_polygon(sq, 0.5);
  CHECK(same_set(set.points_local, {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}}, 1e-15));
  CHECK(set.spacing == 0.5);
}

TEST_CASE("square of side 10 d_pts has 100 points centered on the centroid") {
  const Polygon sq{{{0, 0}, {3, 0}, {3, 3}, {0, 3}}};
  const auto set = discretize_polygon(sq, 0.3);
  CHECK(set.size() == 100);
  CHECK(set.center[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(set.center[1] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("discretization matches brute-force enumeration on random polygons") {
  oracle::Gen gen(101);
  for (int trial = 0; trial < 40; ++trial) {
    // star-shaped polygon: sorted angles, random radii
    const std::size_t nv = gen.index(3, 9);
    std::vector<double> angles;
    for (std::size_t i = 0; i < nv; ++i) angles.push_back(gen.uniform(0, 2 * std::numbers::pi));
    std::sort(angles.begin(), angles.end());
    std::vector<Vec> verts;
    for (double a : angles) {
      const double r = gen.uniform(1.0, 4.0);
      verts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    const Polygon poly{verts};
    if (!poly.is_simple() || poly.area() < 1.0) continue;
    const double h = gen.uniform(0.2, 0.6);
    std::vector<Vec> expected = enumerate_grid(verts, h);
    if (expected.empty()) continue;
    const auto set = discretize_polygon(poly, h);
    CHECK(same_set(set.points_local, expected, 1e-12));
    for (const auto& p : set.points_local) CHECK(oracle::in_polygon(verts, p));
  }
}

TEST_CASE("discretization errors") {
  SUBCASE("tiny triangle contains no cell center") {
    const Polygon tri{{{0, 0}, {0.1, 0}, {0, 0.1}}};
    CHECK_THROWS_WITH_AS(discretize_polygon(tri, 1.0), doctest::Contains("zero resulting points"),
                         ConfigError);
  }
  SUBCASE("zero area") {
    const Polygon line{{{0, 0}, {1, 1}, {2, 2}}};
    CHECK_THROWS_AS(discretize_polygon(line, 0.5), ConfigError);
  }
  SUBCASE("self-intersecting") {
    const Polygon bow{{{0, 0}, {2, 2}, {2, 0}, {0, 2}}};
    CHECK_THROWS_WITH_AS(discretize_polygon(bow, 0.5), doctest::Contains("not simple"), ConfigError);
  }
  SUBCASE("bad spacing") {
    const Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    CHECK_THROWS_AS(discretize_polygon(sq, 0.0), ConfigError);
    CHECK_THROWS_AS(discretize_polygon(sq, -1.0), ConfigError);
  }
}

TEST_CASE("anchor is the point nearest the center, lowest index on ties") {
  const auto set = SamplePointSet::from_points(2, {{0, 0}, {2, 0}, {1, 1}, {1, -1}}, 1.0);
  // center (1,0); points 2 and 3 tie at distance 1, 0 and 1 also at 1
  CHECK(set.anchor_index == 0);
  const auto set2 = SamplePointSet::from_points(2, {{5, 5}, {0, 0}, {0.1, 0}, {-0.1, 0}}, 0.1);
  CHECK(set2.anchor_index == 2);
}

TEST_CASE("load_points") {
  SUBCASE("two rows") {
    const auto set = load_points(temp_file("two.txt", "# comment\n0,0\n1,0\n"));
    CHECK(set.size() == 2);
    CHECK(set.spacing == 1.0);
    CHECK(set.center == Vec{0.5, 0});
    CHECK(set.dim == 2);
  }
  SUBCASE("malformed row names the line") {
    CHECK_THROWS_WITH_AS(load_points(temp_file("bad.txt", "a,b\n")), doctest::Contains("line 1"),
                         ParseError);
    try {
      load_points(temp_file("bad3.txt", "# c\n0,0\n1,x\n"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("bad3.txt") != std::string::npos);
    }
  }
  SUBCASE("empty file") {
    CHECK_THROWS_WITH_AS(load_points(temp_file("empty.txt", "")), doctest::Contains("m = 0"),
                         ParseError);
    CHECK_THROWS_WITH_AS(load_points(temp_file("comments.txt", "# only\n")),
                         doctest::Contains("m = 0"), ParseError);
  }
  SUBCASE("non-finite and mixed dimension") {
    CHECK_THROWS_AS(load_points(temp_file("inf.txt", "0,inf\n")), ParseError);
    CHECK_THROWS_AS(load_points(temp_file("mixed.txt", "0,0\n1,2,3\n")), ParseError);
  }
  SUBCASE("single point has unit spacing") {
    const auto set = load_points(temp_file("one.txt", "3,4\n"));
    CHECK(set.spacing == 1.0);
  }
  SUBCASE("missing file names the path") {
    CHECK_THROWS_WITH_AS(load_points("/nonexistent/shape.txt"),
                         doctest::Contains("/nonexistent/shape.txt"), ConfigError);
  }
  SUBCASE("3-D points") {
    const auto set = load_points(temp_file("three.txt", "0,0,0\n0,0,2\n"));
    CHECK(set.dim == 3);
    CHECK(set.spacing == 2.0);
  }
}

TEST_CASE("write_points round-trips exactly") {
  oracle::Gen gen(5);
  const auto set = SamplePointSet::from_points(2, gen.spread_points(30, -5, 5, 0.3), 0.3);
  const fs::path p = fs::temp_directory_path() / "msform_shape_rt.txt";
  write_points(p, set);
  const auto back = load_points(p);
  CHECK(back.points_local == set.points_local);
}

TEST_CASE("to_world") {
  SUBCASE("identity pose") {
    const auto set = SamplePointSet::from_points(2, {{0, 0}, {1, 0}, {0, 1}, {3, 2}}, 1.0);
    const auto w = to_world(set, {set.anchor(), 0.0});
    CHECK(w.points == set.points_local);
  }
  SUBCASE("single point maps to q_o") {
    const auto set = SamplePointSet::from_points(2, {{0, 0}}, 1.0);
    const auto w = to_world(set, {{3, 4}, std::numbers::pi});
    CHECK(w.points[0] == Vec{3, 4});
  }
  SUBCASE("quarter turn about the anchor") {
    auto set = SamplePointSet::from_points(2, {{0, 0}, {1, 0}}, 1.0);
    REQUIRE(set.anchor_index == 0);
    const auto w = to_world(set, {{0, 0}, std::numbers::pi / 2});
    CHECK(w.points[0] == Vec{0, 0});
    CHECK(std::abs(w.points[1][0]) < 1e-15);
    CHECK(w.points[1][1] == doctest::Approx(1.0));
  }
  SUBCASE("3-D translates only") {
    const auto set = SamplePointSet::from_points(3, {{0, 0, 0}, {0, 0, 1}}, 1.0);
    const auto w = to_world(set, {{1, 1, 1}, 1.0});
    CHECK(w.points[set.anchor_index] == Vec{1, 1, 1});
    CHECK(dist(w.points[0], w.points[1]) == 1.0);
  }
  SUBCASE("non-finite pose") {
    const auto set = SamplePointSet::from_points(2, {{0, 0}}, 1.0);
    CHECK_THROWS_AS(to_world(set, {{NAN, 0}, 0.0}), ConfigError);
  }
}

TEST_CASE("property: to_world is an isometry and pins the anchor") {
  oracle::Gen gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = gen.points(gen.index(1, 25), -10, 10);
    const auto set = SamplePointSet::from_points(2, pts, 0.5);
    const ShapePose pose{gen.point(-50, 50), gen.uniform(-20, 20)};
    const auto w = to_world(set, pose);
    REQUIRE(w.size() == set.size());
    CHECK(dist(w.points[set.anchor_index], pose.position) <= 1e-12 * (1 + norm(pose.position)));
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        const double d0 = dist(pts[a], pts[b]);
        CHECK(std::abs(dist(w.points[a], w.points[b]) - d0) <= 1e-12 * std::max(1.0, d0) * 10);
      }
      const Vec back = to_local(set, pose, w.points[a]);
      CHECK(dist(back, pts[a]) < 1e-11);
    }
  }
}

TEST_CASE("validate_density") {
  std::vector<Vec> pts;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) pts.emplace_back(x, y);
  }
  const auto set = SamplePointSet::from_points(2, pts, 1.0);
  const auto r = validate_density(set, 20, 1.0);
  CHECK(r.enough_points);
  CHECK(r.required_points == 100);
  CHECK(r.spacing_bound == doctest::Approx(std::sqrt(std::numbers::pi * 20 / 100)).epsilon(1e-14));
  CHECK(r.spacing_bound == doctest::Approx(0.7927).epsilon(1e-4));
  CHECK(r.spacing_ok);
  CHECK(r.ok());

  const auto small = SamplePointSet::from_points(2, {pts.begin(), pts.begin() + 10}, 1.0);
  CHECK_FALSE(validate_density(small, 20, 1.0).enough_points);

  for (std::size_t n : {1u, 7u, 500u}) {
    const auto z = validate_density(small, n, 0.0);
    CHECK(z.spacing_ok);
    CHECK(z.spacing_bound == 0.0);
  }
  CHECK_THROWS_AS(validate_density(set, 0, 1.0), ConfigError);
}

TEST_CASE("polygon geometry") {
  const Polygon sq{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
  CHECK(sq.area() == 4.0);
  CHECK(sq.signed_area() == 4.0);
  CHECK(sq.contains({1, 1}));
  CHECK(sq.contains({2, 1}));  // boundary
  CHECK(sq.contains({0, 0}));
  CHECK_FALSE(sq.contains({2.0001, 1}));
  CHECK(sq.is_simple());
  const Polygon cw{{{0, 0}, {0, 2}, {2, 2}, {2, 0}}};
  CHECK(cw.signed_area() == -4.0);
}

TEST_CASE("shape region from sample cells") {
  const Polygon sq{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
  const auto set = discretize_polygon(sq, 1.0);
  const ShapePose pose{{10, 10}, 0.3};
  const ShapeRegion cells(set, pose);
  const ShapeRegion poly(set, pose, sq);
  oracle::Gen gen(9);
  for (int i = 0; i < 2000; ++i) {
    const Vec local = gen.point(-1, 5);
    const double c = std::cos(pose.orientation), s = std::sin(pose.orientation);
    const Vec r = local - set.anchor();
    const Vec world{c * r[0] - s * r[1] + pose.position[0], s * r[0] + c * r[1] + pose.position[1]};
    const bool inside_sq = local[0] > 1e-9 && local[0] < 4 - 1e-9 && local[1] > 1e-9 && local[1] < 4 - 1e-9;
    const bool outside_sq = local[0] < -1e-9 || local[0] > 4 + 1e-9 || local[1] < -1e-9 || local[1] > 4 + 1e-9;
    if (inside_sq) {
      CHECK(cells.contains(world));
      CHECK(poly.contains(world));
    }
    if (outside_sq) {
      CHECK_FALSE(cells.contains(world));
      CHECK_FALSE(poly.contains(world));
    }
  }
}
