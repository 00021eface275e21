#pragma once

// Data-parallel inner loops. Every kernel has a serial reference path and an
// OpenMP path; both evaluate each output element with the same fixed
// summation order, so their results are bitwise identical.

#include <span>
#include <vector>

#include "msform/mass.hpp"
#include "msform/vec.hpp"

namespace msform {

enum class Exec { kSerial, kParallel };

/// kParallel when built with OpenMP, otherwise kSerial.
Exec default_exec();
bool openmp_enabled();

struct CommGraph;

/// Discretization of the sign-driven estimator update.
enum class EstimatorScheme {
  /// Plain explicit Euler: each edge moves gamma*dt*sign(diff).
  kSignEuler,
  /// Per-edge flow sign(diff) * min(gamma*dt, w_ij*|diff|) with Metropolis
  /// weight w_ij = 1/(1 + max(deg_i, deg_j)). Identical to kSignEuler while
  /// |diff| is large and stops at the sliding surface instead of chattering.
  kClippedSign,
};

namespace kernels {

/// out(i, k) = exp(-beta |p_i - q_k^(i)|^2), where robot i uses samples[i].
void reference_signals(std::span<const Vec> positions,
                       std::span<const std::span<const Vec>> samples, const Kernel& kernel,
                       Matrix& out, Exec exec);

/// Same, with every robot using one shared sample set.
void reference_signals(std::span<const Vec> positions, std::span<const Vec> samples,
                       const Kernel& kernel, Matrix& out, Exec exec);

/// True masses, one per sample point, robots summed in index order.
MassVector true_masses(std::span<const Vec> positions, std::span<const Vec> samples,
                       const Kernel& kernel, Exec exec);

/// Adds one synchronous estimator update, computed from the `p_hat`
/// snapshot, to `z`.
void estimator_increment(const Matrix& p_hat, const CommGraph& graph, double gamma, double dt,
                         EstimatorScheme scheme, Matrix& z, Exec exec);

}  // namespace kernels
}  // namespace msform
