#pragma once

#include <span>
#include <vector>

#include "msform/shape.hpp"
#include "msform/vec.hpp"

namespace msform {

/// Gaussian kernel exp(-beta * r^2).
class Kernel {
 public:
  explicit Kernel(double beta);
  double beta() const { return beta_; }
  double weight_sq(double r2) const { return std::exp(-beta_ * r2); }
  double weight(const Vec& a, const Vec& b) const { return weight_sq(dist2(a, b)); }

 private:
  double beta_;
};

/// Masses P_k of the m sample points.
struct MassVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }
};

/// (1/n) sum_i exp(-beta |q - p_i|^2), summed in robot order.
double mass_at(std::span<const Vec> positions, const Vec& q, const Kernel& kernel);

MassVector mass_vector(std::span<const Vec> positions, std::span<const Vec> sample_points,
                       const Kernel& kernel);
MassVector mass_vector(std::span<const Vec> positions, const WorldSampleSet& world,
                       const Kernel& kernel);

/// Mass-maximization metric -ln sqrt(sum P_k^2).
double f_max(std::span<const double> masses);
/// Mass-uniformity metric; nonnegative, zero iff all masses are equal.
double f_uni(std::span<const double> masses);
/// f_max + f_uni.
double f_total(std::span<const double> masses);

inline double f_max(const MassVector& p) { return f_max(p.values); }
inline double f_uni(const MassVector& p) { return f_uni(p.values); }
inline double f_total(const MassVector& p) { return f_total(p.values); }

/// Gradient of f_total with respect to robot i's position, evaluated with the
/// supplied masses (true or estimated).
Vec grad_f_robot(std::span<const Vec> positions, std::size_t i, std::span<const Vec> sample_points,
                 std::span<const double> masses, const Kernel& kernel);

}  // namespace msform
