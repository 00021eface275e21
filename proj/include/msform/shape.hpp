#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msform/vec.hpp"

namespace msform {

/// Discrete representation of a desired shape in its local frame.
struct SamplePointSet {
  int dim = 2;
  std::vector<Vec> points_local;
  double spacing = 1.0;  // nominal inter-point distance d_pts
  Vec center;
  std::size_t anchor_index = 0;

  std::size_t size() const { return points_local.size(); }
  const Vec& anchor() const { return points_local[anchor_index]; }

  /// Validates the points, then fills center and anchor_index.
  static SamplePointSet from_points(int dim, std::vector<Vec> points, double spacing);
};

/// Where the shape sits in the world: the anchor sample point lands on
/// `position`; `orientation` (radians, unwrapped) rotates the shape about it
/// and is used only for d = 2.
struct ShapePose {
  Vec position;
  double orientation = 0.0;

  friend bool operator==(const ShapePose&, const ShapePose&) = default;
};

struct WorldSampleSet {
  int dim = 2;
  std::vector<Vec> points;
  ShapePose pose;
  std::size_t anchor_index = 0;

  std::size_t size() const { return points.size(); }
};

WorldSampleSet to_world(const SamplePointSet& set, const ShapePose& pose);

/// World -> local frame inverse of to_world.
Vec to_local(const SamplePointSet& set, const ShapePose& pose, const Vec& world);

/// Simple 2-D polygon, vertices in order (either winding).
struct Polygon {
  std::vector<Vec> vertices;

  double signed_area() const;
  double area() const;
  /// Inside or on the boundary.
  bool contains(const Vec& p) const;
  bool is_simple() const;
};

/// Samples every cell center of a square grid of pitch `spacing`, anchored at
/// the polygon's bounding-box minimum, that lies inside or on the polygon.
SamplePointSet discretize_polygon(const Polygon& polygon, double spacing);

/// Reads a sample-point file: one comma-separated point per line, '#' comment
/// lines. spacing is the minimum pairwise distance (1 for a single point).
SamplePointSet load_points(const std::filesystem::path& file);
SamplePointSet parse_points(const std::string& text);

/// Same file format as load_points, restricted to d = 2 and read as polygon vertices.
Polygon load_polygon(const std::filesystem::path& file);

void write_points(const std::filesystem::path& file, const SamplePointSet& set);

struct DensityReport {
  std::size_t m = 0;
  std::size_t n = 0;
  double spacing = 0.0;
  double r_avoid = 0.0;
  std::size_t required_points = 0;  // 5n
  bool enough_points = false;
  double spacing_bound = 0.0;  // sqrt(pi n / m) * r_avoid
  bool spacing_ok = false;

  bool ok() const { return enough_points && spacing_ok; }
  std::string summary() const;
};

DensityReport validate_density(const SamplePointSet& set, std::size_t n, double r_avoid);

/// The region robots should fill, in world coordinates. Backed by the source
/// polygon when available, otherwise by the union of axis-aligned cells of
/// side `spacing` centered on each sample point (in the shape frame).
class ShapeRegion {
 public:
  ShapeRegion(SamplePointSet set, ShapePose pose, std::optional<Polygon> polygon = std::nullopt);

  bool contains(const Vec& world) const;
  /// World-frame bounding box (min, max).
  std::pair<Vec, Vec> bounds() const;
  const ShapePose& pose() const { return pose_; }
  const SamplePointSet& samples() const { return set_; }
  bool has_polygon() const { return polygon_.has_value(); }

 private:
  SamplePointSet set_;
  ShapePose pose_;
  std::optional<Polygon> polygon_;
  std::vector<Vec> sorted_;  // sample points sorted by x for cell lookups
};

}  // namespace msform
