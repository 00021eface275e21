#include "msform/mass.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msform/error.hpp"

namespace msform {

namespace {

void require_positive(std::span<const double> masses) {
  if (masses.empty()) throw DomainError("mass vector is empty");
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (!(masses[k] > 0.0)) {
      throw DomainError("mass P_k must be positive; k=" + std::to_string(k) +
                        " has value " + std::to_string(masses[k]) + " (underflow?)");
    }
  }
}

double largest(std::span<const double> masses) {
  double top = 0.0;
  for (double p : masses) top = std::max(top, p);
  return top;
}

// sum (P_k / top)^2, which cannot underflow to zero
double scaled_sum_squares(std::span<const double> masses, double top) {
  double s = 0.0;
  for (double p : masses) s += (p / top) * (p / top);
  return s;
}

}  // namespace

Kernel::Kernel(double beta) : beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("kernel bandwidth beta must be positive and finite");
  }
}

double mass_at(std::span<const Vec> positions, const Vec& q, const Kernel& kernel) {
  if (positions.empty()) throw DomainError("mass is undefined for an empty swarm (n = 0)");
  double s = 0.0;
  for (const auto& p : positions) s += kernel.weight(q, p);
  return s / static_cast<double>(positions.size());
}

MassVector mass_vector(std::span<const Vec> positions, std::span<const Vec> sample_points,
                       const Kernel& kernel) {
  MassVector out;
  out.values.reserve(sample_points.size());
  for (const auto& q : sample_points) out.values.push_back(mass_at(positions, q, kernel));
  return out;
}

MassVector mass_vector(std::span<const Vec> positions, const WorldSampleSet& world,
                       const Kernel& kernel) {
  return mass_vector(positions, world.points, kernel);
}

double f_max(std::span<const double> masses) {
  require_positive(masses);
  const double top = largest(masses);
  return -std::log(top) - 0.5 * std::log(scaled_sum_squares(masses, top));
}

double f_uni(std::span<const double> masses) {
  require_positive(masses);
  const double m = static_cast<double>(masses.size());
  const double top = largest(masses);
  const double total = scaled_sum_squares(masses, top);
  const double half_log_ratio = 0.5 * std::log(m) - 0.5 * std::log(total);
  double s = 0.0;
  for (double p : masses) s += half_log_ratio + std::log(p / top);
  return -s / m;
}

double f_total(std::span<const double> masses) { return f_max(masses) + f_uni(masses); }

Vec grad_f_robot(std::span<const Vec> positions, std::size_t i, std::span<const Vec> sample_points,
                 std::span<const double> masses, const Kernel& kernel) {
  if (i >= positions.size()) throw ConfigError("robot index out of range");
  if (masses.size() != sample_points.size()) {
    throw ConfigError("mass vector length does not match sample point count");
  }
  require_positive(masses);
  const Vec& p = positions[i];
  Vec g;
  for (std::size_t k = 0; k < sample_points.size(); ++k) {
    const Vec diff = p - sample_points[k];
    g += (kernel.weight_sq(norm2(diff)) / masses[k]) * diff;
  }
  const double scale = 2.0 * kernel.beta() /
                       (static_cast<double>(sample_points.size()) *
                        static_cast<double>(positions.size()));
  return g * scale;
}

}  // namespace msform
