#include "msform/shape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "msform/error.hpp"

namespace msform {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

Vec rotate2(const Vec& v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]};
}

bool on_segment(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const Vec ap = p - a;
  const double len = norm(ab);
  const double tol = 1e-12 * std::max(1.0, len);
  if (std::abs(cross2(ab, ap)) > tol * std::max(1.0, len)) return false;
  const double t = dot(ap, ab);
  return t >= -tol && t <= norm2(ab) + tol;
}

// Proper or touching intersection of segments ab and cd.
bool segments_intersect(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  auto orient = [](const Vec& p, const Vec& q, const Vec& r) {
    const double v = cross2(q - p, r - p);
    return (v > 0.0) - (v < 0.0);
  };
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  if (o4 == 0 && on_segment(b, c, d)) return true;
  return false;
}

}  // namespace

SamplePointSet SamplePointSet::from_points(int dim, std::vector<Vec> points, double spacing) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("dimension must be 1, 2 or 3");
  if (points.empty()) throw ConfigError("sample point set is empty (m = 0)");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw ConfigError("sample spacing must be positive and finite");
  }
  Vec center;
  for (const auto& p : points) {
    if (!is_finite(p)) throw ConfigError("sample point has a non-finite coordinate");
    center += p;
  }
  center *= 1.0 / static_cast<double>(points.size());

  std::size_t anchor = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d2 = dist2(points[k], center);
    if (d2 < best) {
      best = d2;
      anchor = k;
    }
  }
  SamplePointSet set;
  set.dim = dim;
  set.points_local = std::move(points);
  set.spacing = spacing;
  set.center = center;
  set.anchor_index = anchor;
  return set;
}

WorldSampleSet to_world(const SamplePointSet& set, const ShapePose& pose) {
  if (!is_finite(pose.position) || !std::isfinite(pose.orientation)) {
    throw ConfigError("shape pose must be finite");
  }
  WorldSampleSet out;
  out.dim = set.dim;
  out.pose = pose;
  out.anchor_index = set.anchor_index;
  out.points.reserve(set.size());
  const Vec& anchor = set.anchor();
  if (set.dim == 2) {
    const double c = std::cos(pose.orientation);
    const double s = std::sin(pose.orientation);
    for (const auto& p : set.points_local) {
      const Vec r = p - anchor;
      out.points.emplace_back(c * r[0] - s * r[1] + pose.position[0],
                              s * r[0] + c * r[1] + pose.position[1], 0.0);
    }
  } else {
    for (const auto& p : set.points_local) out.points.push_back(p - anchor + pose.position);
  }
  return out;
}

Vec to_local(const SamplePointSet& set, const ShapePose& pose, const Vec& world) {
  const Vec rel = world - pose.position;
  if (set.dim == 2) return rotate2(rel, -pose.orientation) + set.anchor();
  return rel + set.anchor();
}

// ---------------------------------------------------------------------------
// Polygon

double Polygon::signed_area() const {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(vertices[i], vertices[(i + 1) % n]);
  return 0.5 * a;
}

double Polygon::area() const { return std::abs(signed_area()); }

bool Polygon::contains(const Vec& p) const {
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_segment(p, vertices[i], vertices[(i + 1) % n])) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec& a = vertices[i];
    const Vec& b = vertices[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

bool Polygon::is_simple() const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& a = vertices[i];
    const Vec& b = vertices[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, vertices[j], vertices[(j + 1) % n])) return false;
    }
  }
  return true;
}

SamplePointSet discretize_polygon(const Polygon& polygon, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw ConfigError("grid spacing must be positive and finite");
  }
  if (polygon.vertices.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
  for (const auto& v : polygon.vertices) {
    if (!is_finite(v)) throw ConfigError("polygon vertex is not finite");
  }
  if (!polygon.is_simple()) throw ConfigError("polygon is not simple (edges intersect)");
  if (!(polygon.area() > 0.0)) throw ConfigError("degenerate polygon (zero area)");

  Vec lo = polygon.vertices.front();
  Vec hi = lo;
  for (const auto& v : polygon.vertices) {
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], v[d]);
      hi[d] = std::max(hi[d], v[d]);
    }
  }
  const auto nx = static_cast<std::size_t>(std::ceil((hi[0] - lo[0]) / spacing));
  const auto ny = static_cast<std::size_t>(std::ceil((hi[1] - lo[1]) / spacing));

  std::vector<Vec> points;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Vec c{lo[0] + (static_cast<double>(ix) + 0.5) * spacing,
                  lo[1] + (static_cast<double>(iy) + 0.5) * spacing};
      if (polygon.contains(c)) points.push_back(c);
    }
  }
  if (points.empty()) throw ConfigError("polygon discretization produced zero resulting points");
  return SamplePointSet::from_points(2, std::move(points), spacing);
}

// ---------------------------------------------------------------------------
// Files

namespace {

struct ParsedRows {
  int dim = 0;
  std::vector<Vec> rows;
};

ParsedRows parse_rows(std::istream& in) {
  ParsedRows out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;

    std::vector<double> coords;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const std::string f = trim(field);
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        throw ParseError("malformed coordinate '" + f + "'", lineno);
      }
      if (used != f.size()) throw ParseError("malformed coordinate '" + f + "'", lineno);
      if (!std::isfinite(v)) throw ParseError("non-finite coordinate", lineno);
      coords.push_back(v);
    }
    if (!t.empty() && t.back() == ',') throw ParseError("trailing comma", lineno);
    if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxDim)) {
      throw ParseError("expected 1 to 3 coordinates, got " + std::to_string(coords.size()),
                       lineno);
    }
    const int dim = static_cast<int>(coords.size());
    if (out.dim == 0) out.dim = dim;
    if (dim != out.dim) {
      throw ParseError("coordinate count " + std::to_string(dim) + " differs from first row (" +
                           std::to_string(out.dim) + ")",
                       lineno);
    }
    Vec p;
    for (int d = 0; d < dim; ++d) p[d] = coords[d];
    out.rows.push_back(p);
  }
  return out;
}

SamplePointSet points_from_rows(ParsedRows rows) {
  if (rows.rows.empty()) throw ParseError("no points in file (m = 0)", 0);
  double spacing = 1.0;
  if (rows.rows.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < rows.rows.size(); ++a) {
      for (std::size_t b = a + 1; b < rows.rows.size(); ++b) {
        best = std::min(best, dist2(rows.rows[a], rows.rows[b]));
      }
    }
    spacing = std::sqrt(best);
    if (!(spacing > 0.0)) throw ParseError("duplicate sample points", 0);
  }
  return SamplePointSet::from_points(rows.dim, std::move(rows.rows), spacing);
}

}  // namespace

SamplePointSet parse_points(const std::string& text) {
  std::istringstream in(text);
  return points_from_rows(parse_rows(in));
}

SamplePointSet load_points(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open sample-point file: " + file.string());
  try {
    return points_from_rows(parse_rows(in));
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), file.string());
  }
}

Polygon load_polygon(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open polygon file: " + file.string());
  ParsedRows rows;
  try {
    rows = parse_rows(in);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), file.string());
  }
  if (rows.dim != 2) throw ConfigError("polygon file must contain 2-D vertices: " + file.string());
  return Polygon{std::move(rows.rows)};
}

void write_points(const std::filesystem::path& file, const SamplePointSet& set) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write sample-point file: " + file.string());
  out << "# m=" << set.size() << " d_pts=" << std::setprecision(17) << set.spacing << '\n';
  for (const auto& p : set.points_local) {
    for (int d = 0; d < set.dim; ++d) {
      if (d > 0) out << ',';
      out << p[d];
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Density

std::string DensityReport::summary() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "m=" << m << " n=" << n << " m>=5n: " << (enough_points ? "pass" : "fail") << " ("
     << m << " >= " << required_points << "); d_pts>=sqrt(pi n/m)*r_avoid: "
     << (spacing_ok ? "pass" : "fail") << " (" << spacing << " >= " << spacing_bound << ")";
  return os.str();
}

DensityReport validate_density(const SamplePointSet& set, std::size_t n, double r_avoid) {
  if (n < 1) throw ConfigError("robot count must be at least 1");
  DensityReport r;
  r.m = set.size();
  r.n = n;
  r.spacing = set.spacing;
  r.r_avoid = r_avoid;
  r.required_points = 5 * n;
  r.enough_points = r.m >= r.required_points;
  r.spacing_bound = std::sqrt(std::numbers::pi * static_cast<double>(n) /
                              static_cast<double>(r.m)) *
                    r_avoid;
  r.spacing_ok = r.spacing >= r.spacing_bound;
  return r;
}

// ---------------------------------------------------------------------------
// Region

ShapeRegion::ShapeRegion(SamplePointSet set, ShapePose pose, std::optional<Polygon> polygon)
    : set_(std::move(set)), pose_(pose), polygon_(std::move(polygon)) {
  if (polygon_ && set_.dim != 2) throw ConfigError("polygon regions require d = 2");
  sorted_ = set_.points_local;
  std::sort(sorted_.begin(), sorted_.end(),
            [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
}

bool ShapeRegion::contains(const Vec& world) const {
  const Vec local = to_local(set_, pose_, world);
  if (polygon_) return polygon_->contains(local);

  const double h = 0.5 * set_.spacing * (1.0 + 1e-12);
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), local[0] - h,
                             [](const Vec& a, double x) { return a[0] < x; });
  for (; it != sorted_.end() && (*it)[0] <= local[0] + h; ++it) {
    bool inside = true;
    for (int d = 1; d < set_.dim; ++d) {
      if (std::abs((*it)[d] - local[d]) > h) {
        inside = false;
        break;
      }
    }
    if (inside) return true;
  }
  return false;
}

std::pair<Vec, Vec> ShapeRegion::bounds() const {
  std::vector<Vec> corners;
  if (polygon_) {
    for (const auto& v : polygon_->vertices) corners.push_back(v);
  } else {
    const double h = 0.5 * set_.spacing;
    for (const auto& p : set_.points_local) {
      for (int sx = -1; sx <= 1; sx += 2) {
        for (int sy = -1; sy <= 1; sy += 2) {
          for (int sz = -1; sz <= 1; sz += 2) {
            Vec c = p;
            c[0] += sx * h;
            if (set_.dim > 1) c[1] += sy * h;
            if (set_.dim > 2) c[2] += sz * h;
            corners.push_back(c);
          }
        }
      }
    }
  }
  Vec lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity()};
  Vec hi = -lo;
  for (const auto& c : corners) {
    Vec wp;
    const Vec r = c - set_.anchor();
    if (set_.dim == 2) {
      wp = rotate2(r, pose_.orientation) + pose_.position;
    } else {
      wp = r + pose_.position;
    }
    for (int d = 0; d < set_.dim; ++d) {
      lo[d] = std::min(lo[d], wp[d]);
      hi[d] = std::max(hi[d], wp[d]);
    }
  }
  for (int d = set_.dim; d < kMaxDim; ++d) lo[d] = hi[d] = 0.0;
  return {lo, hi};
}

}  // namespace msform
