#include "msform/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "msform/error.hpp"

namespace msform {

double metric_e_est(const Matrix& p_hat, std::span<const double> true_mass) {
  if (p_hat.cols() != true_mass.size()) {
    throw ConfigError("estimate matrix does not match mass vector length");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < p_hat.rows(); ++i) {
    const auto row = p_hat.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      worst = std::max(worst, std::abs(row[k] - true_mass[k]));
    }
  }
  return worst;
}

double metric_m_uni(std::span<const Vec> positions, const CommGraph& g) {
  std::vector<double> r_min;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (g.neighbors[i].empty()) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : g.neighbors[i]) best = std::min(best, dist(positions[i], positions[j]));
    r_min.push_back(best);
  }
  if (r_min.empty()) return 0.0;
  double mean = 0.0;
  for (double r : r_min) mean += r;
  mean /= static_cast<double>(r_min.size());
  double s = 0.0;
  for (double r : r_min) s += (r - mean) * (r - mean);
  return s;
}

double min_pairwise_distance(std::span<const Vec> positions) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      best = std::min(best, dist2(positions[i], positions[j]));
    }
  }
  return std::sqrt(best);
}

CoverageRaster::CoverageRaster(const ShapeRegion& region)
    : pitch_(region.samples().spacing / 4.0), pose_(region.pose()) {
  if (region.samples().dim != 2) throw ConfigError("coverage rate is only defined for d = 2");
  const auto [lo, hi] = region.bounds();
  const auto nx = static_cast<std::size_t>(std::ceil((hi[0] - lo[0]) / pitch_));
  const auto ny = static_cast<std::size_t>(std::ceil((hi[1] - lo[1]) / pitch_));
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Vec c{lo[0] + (static_cast<double>(ix) + 0.5) * pitch_,
                  lo[1] + (static_cast<double>(iy) + 0.5) * pitch_};
      if (region.contains(c)) cells_.push_back(c);
    }
  }
  if (cells_.empty()) throw ConfigError("shape region rasterized to zero cells");
}

double CoverageRaster::area() const {
  return static_cast<double>(cells_.size()) * pitch_ * pitch_;
}

double CoverageRaster::cover_radius(std::size_t n) const {
  if (n == 0) throw ConfigError("cover radius needs n >= 1");
  return std::sqrt(3.0 * area() / (2.0 * static_cast<double>(n) * std::numbers::pi));
}

double CoverageRaster::coverage_percent(std::span<const Vec> positions, std::size_t n) const {
  const double r2 = std::pow(cover_radius(n), 2);
  std::size_t covered = 0;
  for (const auto& c : cells_) {
    for (const auto& p : positions) {
      if (dist2(c, p) <= r2) {
        ++covered;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(covered) / static_cast<double>(cells_.size());
}

double metric_m_cover(std::span<const Vec> positions, const CoverageRaster& raster,
                      std::size_t n) {
  return raster.coverage_percent(positions, n);
}

std::optional<double> detect_t_conv(const TrajectoryLog& log, const ShapeRegion& region) {
  std::optional<double> t_conv;
  for (const auto& frame : log.frames) {
    const bool all_inside = std::all_of(frame.positions.begin(), frame.positions.end(),
                                        [&](const Vec& p) { return region.contains(p); });
    if (!all_inside) {
      t_conv.reset();
    } else if (!t_conv) {
      t_conv = frame.t;
    }
  }
  return t_conv;
}

}  // namespace msform
