#pragma once

#include <span>
#include <vector>

#include "msform/kernels.hpp"
#include "msform/mass.hpp"
#include "msform/shape.hpp"
#include "msform/vec.hpp"

namespace msform {

/// Undirected proximity graph: edge (i, j) iff |p_i - p_j| <= r_sense, i != j.
/// Neighbor lists are sorted ascending.
struct CommGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t degree(std::size_t i) const { return neighbors[i].size(); }
  bool has_edge(std::size_t i, std::size_t j) const;
  std::size_t edge_count() const;
};

CommGraph build_graph(std::span<const Vec> positions, double r_sense);
bool is_connected(const CommGraph& g);

// ---------------------------------------------------------------------------
// Shape pose negotiation

struct NegotiationGains {
  double c1 = 1.6;
  double c2 = 1.6;
  double alpha = 0.8;

  void validate() const;
};

/// Each robot's interpretation of the shape pose.
struct NegotiationState {
  int dim = 2;
  std::vector<Vec> positions;   // q_o,i
  std::vector<double> angles;   // theta_o,i
  NegotiationGains gains;

  std::size_t size() const { return positions.size(); }
  /// Component-wise average of the interpretations (the consensus value).
  ShapePose mean_pose() const;
};

/// Explicit Euler step of the finite-time consensus protocol on q_o and theta_o.
NegotiationState negotiation_step(const NegotiationState& state, const CommGraph& g, double dt);

/// True iff the spread (max - min over robots) of every position component
/// and of the angle is below tol.
bool negotiation_converged(const NegotiationState& state, double tol);

// ---------------------------------------------------------------------------
// Mass estimation

/// Lower bound (n - 1) sqrt(2 beta / e) v_max on the estimator gain.
double min_gamma(std::size_t n, const Kernel& kernel, double v_max);

/// Per-robot internal states z and estimates p_hat = reference + z (n x m).
struct EstimatorState {
  Matrix z;
  Matrix p_hat;
  double gamma = 0.01;
  EstimatorScheme scheme = EstimatorScheme::kSignEuler;

  std::size_t robots() const { return z.rows(); }
  std::size_t samples() const { return z.cols(); }

  /// Zero internal state with estimates equal to the reference signals.
  static EstimatorState fresh(const Matrix& reference, double gamma,
                              EstimatorScheme scheme = EstimatorScheme::kSignEuler);
};

/// One synchronous update from the pre-step snapshot; afterwards p_hat is
/// recomputed from the new z and `reference` (the signals at the current
/// positions).
EstimatorState estimator_step(const EstimatorState& est, const Matrix& reference,
                              const CommGraph& g, double dt, Exec exec = default_exec());

/// Convenience overload computing the reference from positions and a shared
/// world sample set.
EstimatorState estimator_step(const EstimatorState& est, std::span<const Vec> positions,
                              const WorldSampleSet& world, const Kernel& kernel,
                              const CommGraph& g, double dt, Exec exec = default_exec());

/// z <- 0, p_hat <- reference.
EstimatorState reset_estimator(const EstimatorState& est, const Matrix& reference);
EstimatorState reset_estimator(const EstimatorState& est, std::span<const Vec> positions,
                               const WorldSampleSet& world, const Kernel& kernel);

/// Column sums of z; zero (up to rounding) whenever the estimator started from
/// z = 0 and has only been advanced by estimator_step.
std::vector<double> z_column_sums(const EstimatorState& est);

}  // namespace msform
