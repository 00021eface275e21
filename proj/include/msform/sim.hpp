#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msform/config.hpp"
#include "msform/controller.hpp"
#include "msform/metrics.hpp"
#include "msform/protocols.hpp"
#include "msform/shape.hpp"

namespace msform {

struct SwarmState {
  double t = 0.0;
  std::size_t step_index = 0;
  std::vector<Vec> positions;
  std::vector<Vec> velocities;  // last applied command
  std::vector<std::uint64_t> ids;
  std::uint64_t next_id = 0;
  std::size_t events_applied = 0;

  NegotiationState negotiation;
  bool pose_frozen = false;
  ShapePose frozen_pose;

  EstimatorState estimator;
  bool connected = true;
  ControlDiagnostics diagnostics;

  std::size_t size() const { return positions.size(); }
};

/// The pose metrics are measured against: the latched consensus pose, or the
/// current average of the interpretations before consensus. The average is
/// invariant under negotiation, so both agree once consensus is reached.
ShapePose reference_pose(const SwarmState& state);

/// Uniform random positions in the init box, q_o,i = p_i, z = 0.
SwarmState init(const SimConfig& config, const SamplePointSet& shape,
                std::vector<std::string>* warnings = nullptr);

/// One control period: graph, negotiation, estimation, control, integration.
SwarmState step(const SwarmState& state, const SimConfig& config, const SamplePointSet& shape,
                Exec exec = default_exec());

/// Adds or removes robots, then resets every estimator.
SwarmState apply_event(const SwarmState& state, const SimEvent& event, const SimConfig& config,
                       const SamplePointSet& shape);

/// Per-robot reference signals exp(-beta |p_i - q_k|^2) for the sample points
/// each robot currently uses.
Matrix reference_matrix(const SwarmState& state, const SimConfig& config,
                        const SamplePointSet& shape, Exec exec = default_exec());

struct MetricsRecord {
  double t = 0.0;
  bool provisional = false;  // pose not yet agreed
  std::size_t n = 0;
  double f = 0.0;
  double f_max = 0.0;
  double f_uni = 0.0;
  double f_est = 0.0;  // mean over robots of F evaluated on their own estimates
  double f_max_est = 0.0;
  double f_uni_est = 0.0;
  double e_est = 0.0;
  double m_uni = 0.0;
  double m_cover = 0.0;  // percent; NaN when d != 2
  bool connected = true;
  double min_pairwise_distance = 0.0;
  double max_speed = 0.0;
  double max_z_column_sum = 0.0;  // |sum_i z(i,k)| worst over k
};

/// Evaluates all metrics at the reference pose. `raster` may be null (M_cover
/// is then NaN).
MetricsRecord compute_metrics(const SwarmState& state, const SimConfig& config,
                              const SamplePointSet& shape, const CoverageRaster* raster,
                              Exec exec = default_exec());

double metric_e_est(const SwarmState& state, const SimConfig& config,
                    const SamplePointSet& shape);
double metric_m_uni(const SwarmState& state, const SimConfig& config);

struct RunResult {
  TrajectoryLog trajectory;
  std::vector<MetricsRecord> metrics;
  std::optional<double> t_conv;
  DensityReport density;
  std::vector<std::string> warnings;
  SwarmState final_state;
  std::size_t steps = 0;
};

/// Full deterministic run. Events fire at the first step boundary at or after
/// their time. `polygon` (local shape frame) defines the region for coverage
/// and convergence time; otherwise sample-point cells are used.
RunResult run(const SimConfig& config, const SamplePointSet& shape,
              const EventSchedule& events = {}, const std::optional<Polygon>& polygon = {},
              Exec exec = default_exec());

}  // namespace msform
