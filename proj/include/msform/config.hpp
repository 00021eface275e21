#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msform/controller.hpp"
#include "msform/kernels.hpp"
#include "msform/protocols.hpp"
#include "msform/vec.hpp"

namespace msform {

enum class ThetaInit { kConstant, kRandom };

/// Scenario description. Defaults are the desk-scale simulation gains.
struct SimConfig {
  int dim = 2;
  std::size_t n0 = 20;
  double dt_ctrl = 0.01;
  std::size_t estimator_substeps = 10;
  double duration = 60.0;

  double r_sense = 5.0;
  double r_avoid = 1.0;
  double v_max = 1.0;
  double beta = 1.5;

  double c1 = 1.6;
  double c2 = 1.6;
  double alpha = 0.8;
  double gamma = 0.01;
  EstimatorScheme estimator_scheme = EstimatorScheme::kSignEuler;

  double sigma1 = 30.0;
  double sigma2 = 1000.0;
  double eps = 1e-8;
  bool defensive_clamp = false;

  std::uint64_t seed = 1;
  Vec init_min{0.0, 0.0, 0.0};
  Vec init_max{10.0, 10.0, 0.0};
  ThetaInit theta_init = ThetaInit::kConstant;
  double theta0 = 0.0;
  double negotiation_tol = 1e-6;

  std::size_t metrics_every = 10;     // control steps between metric records
  std::size_t trajectory_every = 10;  // control steps between trajectory records
  bool strict_gamma = false;
  bool oracle_mass = false;

  ControlParams control_params() const;
  NegotiationGains negotiation_gains() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  /// Stable key=value rendering (17 significant digits), one key per line.
  std::string canonical() const;
  /// SHA-256 of canonical().
  std::string hash() const;
};

/// Parses the flat key=value format; '#' starts a comment line, unknown keys
/// are errors.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& file);

/// Robot membership change applied at the first step boundary at or after `time`.
struct SimEvent {
  enum class Kind { kAdd, kRemove };

  double time = 0.0;
  Kind kind = Kind::kAdd;
  std::vector<Vec> positions;       // explicit spawn positions (add)
  std::size_t random_count = 0;     // seeded spawns inside the init box (add)
  std::vector<std::uint64_t> ids;   // robots to remove
};

struct EventSchedule {
  std::vector<SimEvent> events;  // non-decreasing times
};

/// Lines: "t add x,y[;x,y...]", "t add random:K", "t remove id[,id...]".
EventSchedule parse_events(const std::string& text, int dim);
EventSchedule load_events(const std::filesystem::path& file, int dim);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

}  // namespace msform
