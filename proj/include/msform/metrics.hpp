#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msform/protocols.hpp"
#include "msform/shape.hpp"
#include "msform/vec.hpp"

namespace msform {

struct TrajectoryFrame {
  double t = 0.0;
  std::vector<std::uint64_t> ids;
  std::vector<Vec> positions;
  std::vector<Vec> velocities;
};

struct TrajectoryLog {
  int dim = 2;
  std::vector<TrajectoryFrame> frames;
};

/// max_{i,k} |p_hat(i,k) - P_k|.
double metric_e_est(const Matrix& p_hat, std::span<const double> true_mass);

/// Sum over robots of (r_min,i - mean r_min)^2, r_min,i the distance to the
/// nearest graph neighbor. Robots without neighbors are left out of both the
/// sum and the mean.
double metric_m_uni(std::span<const Vec> positions, const CommGraph& g);

/// Smallest pairwise robot distance; +inf for fewer than two robots.
double min_pairwise_distance(std::span<const Vec> positions);

/// Rasterization of a 2-D shape region at pitch spacing/4, used for the
/// coverage rate.
class CoverageRaster {
 public:
  explicit CoverageRaster(const ShapeRegion& region);

  double pitch() const { return pitch_; }
  double area() const;  // S_shape
  std::size_t cell_count() const { return cells_.size(); }
  const std::vector<Vec>& cells() const { return cells_; }
  const ShapePose& pose() const { return pose_; }

  /// sqrt(3 S_shape / (2 n pi)).
  double cover_radius(std::size_t n) const;

  /// 100 * (covered cells) / (shape cells), a cell being covered when its
  /// center is within cover_radius(n) of some robot.
  double coverage_percent(std::span<const Vec> positions, std::size_t n) const;

 private:
  double pitch_ = 0.0;
  ShapePose pose_;
  std::vector<Vec> cells_;
};

double metric_m_cover(std::span<const Vec> positions, const CoverageRaster& raster, std::size_t n);

/// Earliest frame time after which every robot is inside the region in that
/// frame and in all later frames; nullopt if the last frame has a robot outside.
std::optional<double> detect_t_conv(const TrajectoryLog& log, const ShapeRegion& region);

}  // namespace msform
