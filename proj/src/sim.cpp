#include "msform/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "msform/error.hpp"
#include "parallel.hpp"

namespace msform {

namespace {

void warn(std::vector<std::string>* sink, std::string msg) {
  if (sink) sink->push_back(std::move(msg));
}

Vec random_in_box(std::mt19937_64& rng, const SimConfig& config) {
  Vec p;
  for (int d = 0; d < config.dim; ++d) {
    const double lo = config.init_min[d];
    const double hi = config.init_max[d];
    p[d] = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return p;
}

bool uses_shared_samples(const SwarmState& state, const SimConfig& config) {
  return state.pose_frozen || config.oracle_mass;
}

// Sample points each robot currently uses: one shared set once the pose is
// agreed (or in oracle mode), otherwise each robot's own interpretation.
std::vector<WorldSampleSet> robot_samples(const SwarmState& state, const SimConfig& config,
                                          const SamplePointSet& shape) {
  if (uses_shared_samples(state, config)) return {to_world(shape, reference_pose(state))};
  std::vector<WorldSampleSet> sets;
  sets.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    sets.push_back(to_world(shape, {state.negotiation.positions[i], state.negotiation.angles[i]}));
  }
  return sets;
}

std::vector<std::span<const Vec>> views(const std::vector<WorldSampleSet>& sets, std::size_t n) {
  std::vector<std::span<const Vec>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(sets.size() == 1 ? sets[0].points : sets[i].points);
  return out;
}

Matrix references_for(const SwarmState& state, const std::vector<WorldSampleSet>& sets,
                      const Kernel& kernel, Exec exec) {
  Matrix ref;
  const auto v = views(sets, state.size());
  kernels::reference_signals(state.positions, v, kernel, ref, exec);
  return ref;
}

// Oracle estimator: every robot holds the true masses; z carries the
// difference so that p_hat = reference + z still holds.
void fill_oracle(EstimatorState& est, const Matrix& reference, const MassVector& truth) {
  est.p_hat = Matrix(reference.rows(), reference.cols());
  est.z = Matrix(reference.rows(), reference.cols());
  for (std::size_t i = 0; i < reference.rows(); ++i) {
    for (std::size_t k = 0; k < reference.cols(); ++k) {
      est.p_hat(i, k) = truth[k];
      est.z(i, k) = truth[k] - reference(i, k);
    }
  }
}

void rebuild_estimator(SwarmState& state, const SimConfig& config, const SamplePointSet& shape,
                       Exec exec) {
  const Kernel kernel(config.beta);
  const auto sets = robot_samples(state, config, shape);
  const Matrix ref = references_for(state, sets, kernel, exec);
  state.estimator = EstimatorState::fresh(ref, config.gamma, config.estimator_scheme);
  if (config.oracle_mass) {
    fill_oracle(state.estimator, ref, kernels::true_masses(state.positions, sets[0].points, kernel, exec));
  }
}

void maybe_freeze(SwarmState& state, const SimConfig& config) {
  if (!state.pose_frozen && negotiation_converged(state.negotiation, config.negotiation_tol)) {
    state.pose_frozen = true;
    state.frozen_pose = state.negotiation.mean_pose();
  }
}

}  // namespace

ShapePose reference_pose(const SwarmState& state) {
  return state.pose_frozen ? state.frozen_pose : state.negotiation.mean_pose();
}

SwarmState init(const SimConfig& config, const SamplePointSet& shape,
                std::vector<std::string>* warnings) {
  config.validate();
  if (shape.dim != config.dim) {
    throw ConfigError("shape dimension " + std::to_string(shape.dim) +
                      " does not match config dim " + std::to_string(config.dim));
  }
  const Kernel kernel(config.beta);
  const double bound = min_gamma(config.n0, kernel, config.v_max);
  if (config.gamma < bound) {
    std::ostringstream os;
    os.precision(17);
    os << "gamma=" << config.gamma << " is below min_gamma=" << bound
       << " = (n-1) sqrt(2 beta / e) v_max for n=" << config.n0;
    if (config.strict_gamma) throw ConfigError(os.str());
    warn(warnings, os.str());
  }

  SwarmState state;
  std::mt19937_64 rng(config.seed);
  bool degenerate = true;
  for (int d = 0; d < config.dim; ++d) degenerate = degenerate && config.init_min[d] == config.init_max[d];
  if (degenerate && config.n0 > 1) warn(warnings, "init box is a single point; all robots start coincident");

  for (std::size_t i = 0; i < config.n0; ++i) {
    state.positions.push_back(random_in_box(rng, config));
    state.ids.push_back(i);
  }
  state.next_id = config.n0;
  state.velocities.assign(config.n0, Vec{});

  state.negotiation.dim = config.dim;
  state.negotiation.gains = config.negotiation_gains();
  state.negotiation.positions = state.positions;
  for (std::size_t i = 0; i < config.n0; ++i) {
    state.negotiation.angles.push_back(
        config.theta_init == ThetaInit::kRandom
            ? std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng)
            : config.theta0);
  }
  maybe_freeze(state, config);

  const DensityReport density = validate_density(shape, config.n0, config.r_avoid);
  if (!density.ok()) warn(warnings, "sample density advisory: " + density.summary());

  rebuild_estimator(state, config, shape, default_exec());
  state.connected = is_connected(build_graph(state.positions, config.r_sense));
  return state;
}

Matrix reference_matrix(const SwarmState& state, const SimConfig& config,
                        const SamplePointSet& shape, Exec exec) {
  return references_for(state, robot_samples(state, config, shape), Kernel(config.beta), exec);
}

SwarmState step(const SwarmState& state, const SimConfig& config, const SamplePointSet& shape,
                Exec exec) {
  SwarmState next = state;
  const Kernel kernel(config.beta);
  const ControlParams params = config.control_params();
  const double dt_sub = config.dt_ctrl / static_cast<double>(config.estimator_substeps);

  // (1) proximity graph
  const CommGraph graph = build_graph(state.positions, config.r_sense);
  next.connected = is_connected(graph);

  // (2) pose negotiation until consensus, then latched
  if (!next.pose_frozen) {
    for (std::size_t s = 0; s < config.estimator_substeps; ++s) {
      next.negotiation = negotiation_step(next.negotiation, graph, dt_sub);
    }
    maybe_freeze(next, config);
  }

  // (3) mass estimation
  const auto sets = robot_samples(next, config, shape);
  const Matrix ref = references_for(next, sets, kernel, exec);
  if (config.oracle_mass) {
    fill_oracle(next.estimator, ref, kernels::true_masses(next.positions, sets[0].points, kernel, exec));
  } else {
    auto& est = next.estimator;
    const auto r = ref.data();
    const auto z = est.z.data();
    auto p = est.p_hat.data();
    for (std::size_t idx = 0; idx < p.size(); ++idx) p[idx] = r[idx] + z[idx];
    for (std::size_t s = 0; s < config.estimator_substeps; ++s) {
      est = estimator_step(est, ref, graph, dt_sub, exec);
    }
  }

  // (4) control, one robot per index
  const auto samples = views(sets, next.size());
  std::vector<ControlDiagnostics> diag(next.size());
  detail::for_each_index(next.size(), exec, [&](std::size_t i) {
    std::vector<Vec> nbr;
    nbr.reserve(graph.neighbors[i].size());
    for (std::size_t j : graph.neighbors[i]) nbr.push_back(state.positions[j]);
    const VelocityCommand cmd = control_step(state.positions[i], samples[i],
                                             next.estimator.p_hat.row(i), nbr, kernel, params,
                                             &diag[i]);
    next.velocities[i] = cmd.v;
  });
  for (const auto& d : diag) next.diagnostics += d;

  // (5) explicit Euler integration
  for (std::size_t i = 0; i < next.size(); ++i) {
    next.positions[i] += next.velocities[i] * config.dt_ctrl;
    if (!is_finite(next.positions[i])) throw DomainError("robot position became non-finite");
  }
  next.step_index = state.step_index + 1;
  next.t = static_cast<double>(next.step_index) * config.dt_ctrl;
  return next;
}

SwarmState apply_event(const SwarmState& state, const SimEvent& event, const SimConfig& config,
                       const SamplePointSet& shape) {
  SwarmState next = state;
  if (event.kind == SimEvent::Kind::kRemove) {
    for (std::uint64_t id : event.ids) {
      const auto it = std::find(next.ids.begin(), next.ids.end(), id);
      if (it == next.ids.end()) {
        throw ConfigError("cannot remove unknown robot id " + std::to_string(id));
      }
      const auto idx = static_cast<std::size_t>(it - next.ids.begin());
      if (next.size() == 1) throw ConfigError("cannot remove the last robot");
      next.ids.erase(it);
      next.positions.erase(next.positions.begin() + static_cast<std::ptrdiff_t>(idx));
      next.velocities.erase(next.velocities.begin() + static_cast<std::ptrdiff_t>(idx));
      next.negotiation.positions.erase(next.negotiation.positions.begin() +
                                       static_cast<std::ptrdiff_t>(idx));
      next.negotiation.angles.erase(next.negotiation.angles.begin() +
                                    static_cast<std::ptrdiff_t>(idx));
    }
  } else {
    std::vector<Vec> spawn = event.positions;
    if (event.random_count > 0) {
      std::seed_seq seq{static_cast<std::uint64_t>(config.seed),
                        static_cast<std::uint64_t>(state.events_applied) + 1};
      std::mt19937_64 rng(seq);
      for (std::size_t c = 0; c < event.random_count; ++c) spawn.push_back(random_in_box(rng, config));
    }
    const ShapePose pose = reference_pose(state);
    for (const auto& p : spawn) {
      if (!is_finite(p)) throw ConfigError("spawn position must be finite");
      next.positions.push_back(p);
      next.velocities.push_back(Vec{});
      next.ids.push_back(next.next_id++);
      next.negotiation.positions.push_back(pose.position);
      next.negotiation.angles.push_back(pose.orientation);
    }
  }
  ++next.events_applied;
  maybe_freeze(next, config);
  rebuild_estimator(next, config, shape, default_exec());
  next.connected = is_connected(build_graph(next.positions, config.r_sense));
  return next;
}

// ---------------------------------------------------------------------------

namespace {

struct FTriple {
  double f = std::numeric_limits<double>::quiet_NaN();
  double f_max = std::numeric_limits<double>::quiet_NaN();
  double f_uni = std::numeric_limits<double>::quiet_NaN();
};

FTriple evaluate_f(std::span<const double> masses) {
  FTriple out;
  try {
    out.f_max = f_max(masses);
    out.f_uni = f_uni(masses);
    out.f = out.f_max + out.f_uni;
  } catch (const DomainError&) {
    out = {};
  }
  return out;
}

}  // namespace

MetricsRecord compute_metrics(const SwarmState& state, const SimConfig& config,
                              const SamplePointSet& shape, const CoverageRaster* raster,
                              Exec exec) {
  const Kernel kernel(config.beta);
  const WorldSampleSet world = to_world(shape, reference_pose(state));
  const MassVector truth = kernels::true_masses(state.positions, world.points, kernel, exec);

  MetricsRecord r;
  r.t = state.t;
  r.provisional = !state.pose_frozen;
  r.n = state.size();

  const FTriple f = evaluate_f(truth.values);
  r.f = f.f;
  r.f_max = f.f_max;
  r.f_uni = f.f_uni;

  FTriple est_sum{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < state.size(); ++i) {
    const FTriple fi = evaluate_f(state.estimator.p_hat.row(i));
    est_sum.f += fi.f;
    est_sum.f_max += fi.f_max;
    est_sum.f_uni += fi.f_uni;
  }
  const auto n = static_cast<double>(state.size());
  r.f_est = est_sum.f / n;
  r.f_max_est = est_sum.f_max / n;
  r.f_uni_est = est_sum.f_uni / n;

  r.e_est = metric_e_est(state.estimator.p_hat, truth.values);
  const CommGraph graph = build_graph(state.positions, config.r_sense);
  r.m_uni = metric_m_uni(state.positions, graph);
  r.connected = is_connected(graph);
  r.m_cover = raster ? metric_m_cover(state.positions, *raster, state.size())
                     : std::numeric_limits<double>::quiet_NaN();
  r.min_pairwise_distance = min_pairwise_distance(state.positions);
  for (const auto& v : state.velocities) r.max_speed = std::max(r.max_speed, norm(v));
  for (double s : z_column_sums(state.estimator)) {
    r.max_z_column_sum = std::max(r.max_z_column_sum, std::abs(s));
  }
  return r;
}

double metric_e_est(const SwarmState& state, const SimConfig& config,
                    const SamplePointSet& shape) {
  const WorldSampleSet world = to_world(shape, reference_pose(state));
  return metric_e_est(state.estimator.p_hat,
                      mass_vector(state.positions, world, Kernel(config.beta)).values);
}

double metric_m_uni(const SwarmState& state, const SimConfig& config) {
  return metric_m_uni(state.positions, build_graph(state.positions, config.r_sense));
}

RunResult run(const SimConfig& config, const SamplePointSet& shape, const EventSchedule& events,
              const std::optional<Polygon>& polygon, Exec exec) {
  RunResult out;
  SwarmState state = init(config, shape, &out.warnings);
  out.density = validate_density(shape, config.n0, config.r_avoid);
  out.trajectory.dim = config.dim;

  const auto total_steps =
      static_cast<std::size_t>(std::llround(config.duration / config.dt_ctrl));
  const double time_slack = 1e-9 * config.dt_ctrl;

  std::optional<CoverageRaster> raster;
  auto current_raster = [&]() -> const CoverageRaster* {
    if (config.dim != 2) return nullptr;
    const ShapePose pose = reference_pose(state);
    if (!raster || !(raster->pose() == pose)) raster.emplace(ShapeRegion(shape, pose, polygon));
    return &*raster;
  };

  std::size_t next_event = 0;
  for (std::size_t s = 0;; ++s) {
    while (next_event < events.events.size() &&
           events.events[next_event].time <= state.t + time_slack) {
      state = apply_event(state, events.events[next_event], config, shape);
      ++next_event;
    }
    const bool last = s == total_steps;
    if (s % config.trajectory_every == 0 || last) {
      out.trajectory.frames.push_back({state.t, state.ids, state.positions, state.velocities});
    }
    if (s % config.metrics_every == 0 || last) {
      out.metrics.push_back(compute_metrics(state, config, shape, current_raster(), exec));
    }
    if (last) break;
    const bool was_connected = state.connected;
    state = step(state, config, shape, exec);
    if (was_connected && !state.connected) {
      std::ostringstream os;
      os << "communication graph disconnected at t=" << state.t;
      out.warnings.push_back(os.str());
    }
  }
  for (; next_event < events.events.size(); ++next_event) {
    std::ostringstream os;
    os << "event at t=" << events.events[next_event].time << " is after the end of the run";
    out.warnings.push_back(os.str());
  }

  out.t_conv = detect_t_conv(out.trajectory, ShapeRegion(shape, reference_pose(state), polygon));
  out.steps = total_steps;
  out.final_state = std::move(state);
  return out;
}

}  // namespace msform
