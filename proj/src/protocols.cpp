#include "msform/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "msform/error.hpp"

namespace msform {

bool CommGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto& nb = neighbors[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::size_t CommGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbors) twice += nb.size();
  return twice / 2;
}

CommGraph build_graph(std::span<const Vec> positions, double r_sense) {
  if (!(r_sense > 0.0)) throw ConfigError("r_sense must be positive");
  CommGraph g;
  g.n = positions.size();
  g.neighbors.assign(g.n, {});
  const double r2 = r_sense * r_sense;
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = i + 1; j < g.n; ++j) {
      if (dist2(positions[i], positions[j]) <= r2) {
        g.neighbors[i].push_back(j);
        g.neighbors[j].push_back(i);
      }
    }
  }
  // lists come out ascending: lower ids are appended before higher ones
  return g;
}

bool is_connected(const CommGraph& g) {
  if (g.n <= 1) return true;
  std::vector<char> seen(g.n, 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j : g.neighbors[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == g.n;
}

// ---------------------------------------------------------------------------

void NegotiationGains::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("negotiation gains c1, c2 must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("negotiation exponent alpha must be in (0,1)");
}

ShapePose NegotiationState::mean_pose() const {
  ShapePose pose;
  if (positions.empty()) return pose;
  for (const auto& q : positions) pose.position += q;
  pose.position *= 1.0 / static_cast<double>(positions.size());
  double a = 0.0;
  for (double t : angles) a += t;
  pose.orientation = a / static_cast<double>(angles.size());
  return pose;
}

namespace {

double coupling(double self, double other, double alpha) {
  const double d = self - other;
  if (d == 0.0) return 0.0;
  const double mag = std::pow(std::abs(d), alpha);
  return d > 0.0 ? mag : -mag;
}

}  // namespace

NegotiationState negotiation_step(const NegotiationState& state, const CommGraph& g, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (g.n != state.size()) throw ConfigError("graph size does not match negotiation state");
  const auto& gains = state.gains;
  NegotiationState next = state;
  for (std::size_t i = 0; i < state.size(); ++i) {
    Vec dq;
    double dtheta = 0.0;
    for (std::size_t j : g.neighbors[i]) {
      for (int d = 0; d < state.dim; ++d) {
        dq[d] += coupling(state.positions[i][d], state.positions[j][d], gains.alpha);
      }
      dtheta += coupling(state.angles[i], state.angles[j], gains.alpha);
    }
    next.positions[i] -= dq * (gains.c1 * dt);
    next.angles[i] -= gains.c2 * dt * dtheta;
  }
  return next;
}

bool negotiation_converged(const NegotiationState& state, double tol) {
  if (state.size() <= 1) return true;
  for (int d = 0; d < state.dim; ++d) {
    const auto [lo, hi] = std::minmax_element(
        state.positions.begin(), state.positions.end(),
        [d](const Vec& a, const Vec& b) { return a[d] < b[d]; });
    if (!((*hi)[d] - (*lo)[d] < tol)) return false;
  }
  const auto [lo, hi] = std::minmax_element(state.angles.begin(), state.angles.end());
  return *hi - *lo < tol;
}

// ---------------------------------------------------------------------------

double min_gamma(std::size_t n, const Kernel& kernel, double v_max) {
  if (n <= 1) return 0.0;
  return static_cast<double>(n - 1) * std::sqrt(2.0 * kernel.beta() / std::numbers::e) * v_max;
}

EstimatorState EstimatorState::fresh(const Matrix& reference, double gamma,
                                     EstimatorScheme scheme) {
  if (!(gamma > 0.0)) throw ConfigError("estimator gain gamma must be positive");
  EstimatorState est;
  est.z = Matrix(reference.rows(), reference.cols(), 0.0);
  est.p_hat = reference;
  est.gamma = gamma;
  est.scheme = scheme;
  return est;
}

namespace {

void refresh_estimates(EstimatorState& est, const Matrix& reference) {
  const auto ref = reference.data();
  const auto z = est.z.data();
  auto out = est.p_hat.data();
  for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = ref[idx] + z[idx];
}

}  // namespace

EstimatorState estimator_step(const EstimatorState& est, const Matrix& reference,
                              const CommGraph& g, double dt, Exec exec) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (reference.rows() != est.robots() || reference.cols() != est.samples()) {
    throw ConfigError("reference signal matrix does not match estimator dimensions");
  }
  if (g.n != est.robots()) throw ConfigError("graph size does not match estimator");
  EstimatorState next = est;
  kernels::estimator_increment(est.p_hat, g, est.gamma, dt, est.scheme, next.z, exec);
  refresh_estimates(next, reference);
  return next;
}

EstimatorState estimator_step(const EstimatorState& est, std::span<const Vec> positions,
                              const WorldSampleSet& world, const Kernel& kernel,
                              const CommGraph& g, double dt, Exec exec) {
  Matrix reference;
  kernels::reference_signals(positions, world.points, kernel, reference, exec);
  return estimator_step(est, reference, g, dt, exec);
}

EstimatorState reset_estimator(const EstimatorState& est, const Matrix& reference) {
  return EstimatorState::fresh(reference, est.gamma, est.scheme);
}

EstimatorState reset_estimator(const EstimatorState& est, std::span<const Vec> positions,
                               const WorldSampleSet& world, const Kernel& kernel) {
  Matrix reference;
  kernels::reference_signals(positions, world.points, kernel, reference, Exec::kSerial);
  return reset_estimator(est, reference);
}

std::vector<double> z_column_sums(const EstimatorState& est) {
  std::vector<double> sums(est.samples(), 0.0);
  for (std::size_t i = 0; i < est.robots(); ++i) {
    const auto row = est.z.row(i);
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += row[k];
  }
  return sums;
}

}  // namespace msform
