#pragma once

#include <cstddef>
#include <span>

#include "msform/mass.hpp"
#include "msform/vec.hpp"

namespace msform {

struct ControlParams {
  double sigma1 = 30.0;    // meanshift gain
  double sigma2 = 1000.0;  // repulsion gain
  double eps = 1e-8;       // conflict margin, repulsion regularizer, phi scale
  double r_avoid = 1.0;
  double v_max = 1.0;
  /// Clamp estimates below at 1e-300 instead of failing on non-positive values.
  bool defensive_clamp = false;

  void validate(double r_sense) const;
};

struct VelocityCommand {
  Vec v_ms;
  Vec v_cv;
  Vec v;
};

/// Work counters; kernel_evals + neighbor_terms is the per-robot cost.
struct ControlDiagnostics {
  std::size_t kernel_evals = 0;
  std::size_t neighbor_terms = 0;
  std::size_t coincident_neighbors = 0;
  std::size_t clamped_estimates = 0;

  ControlDiagnostics& operator+=(const ControlDiagnostics& o);
};

/// Decentralized meanshift velocity: (sigma1/m) times the offset from p_i to
/// the psi-weighted mean of the sample points, psi_k = exp(-beta|q_k-p_i|^2)/P_hat_k.
Vec meanshift_command(const Vec& p_i, std::span<const Vec> samples,
                      std::span<const double> p_hat_i, const Kernel& kernel,
                      const ControlParams& params, ControlDiagnostics* diag = nullptr);

/// Unscaled repulsion from the neighbors within r_avoid. Neighbors farther
/// away are skipped, so the full neighbor list may be passed.
Vec repulsion_raw(const Vec& p_i, std::span<const Vec> neighbors, const ControlParams& params,
                  ControlDiagnostics* diag = nullptr);

/// Self-tuning repulsion gain in [0, 1].
double kappa2(const Vec& v_ms, const Vec& v_cv_raw, const ControlParams& params);

/// Projection onto the ball of radius v_max.
Vec saturate(const Vec& v, double v_max);

VelocityCommand control_step(const Vec& p_i, std::span<const Vec> samples,
                             std::span<const double> p_hat_i,
                             std::span<const Vec> neighbor_positions, const Kernel& kernel,
                             const ControlParams& params, ControlDiagnostics* diag = nullptr);

}  // namespace msform
