#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msform/kernels.hpp"
#include "msform/shape.hpp"
#include "msform/vec.hpp"

namespace msform {

/// Deterministic-annealing schedule for the kernel bandwidth.
struct AnnealConfig {
  double beta_initial = 0.01;
  double beta_final = 150.0;
  double alpha_c = 1.025;
  double epsilon_a = 1e-3;
  double d_min = 0.0;
  std::uint64_t seed = 1;
  std::size_t max_inner_iterations = 100000;

  void validate() const;
};

/// A(k, i) = exp(-beta |q_k - p_i|^2) / sum_j exp(-beta |q_k - p_j|^2).
/// Rows whose weights all underflow are filled uniformly and counted in
/// `underflow_rows` when given.
Matrix e_step(std::span<const Vec> robots, std::span<const Vec> samples, double beta,
              Exec exec = default_exec(), std::size_t* underflow_rows = nullptr);

/// p_i = sum_k q_k A(k, i) / sum_k A(k, i). A robot with zero total
/// association keeps its previous position.
std::vector<Vec> m_step(std::span<const Vec> samples, const Matrix& assoc,
                        std::span<const Vec> previous, Exec exec = default_exec());

struct InnerResult {
  std::vector<Vec> positions;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Alternates E and M steps at fixed beta until the largest position change
/// drops below epsilon_a (or the iteration cap).
InnerResult anneal_inner(std::span<const Vec> samples, std::vector<Vec> start, double beta,
                         const AnnealConfig& config, Exec exec = default_exec(),
                         std::size_t* underflow_rows = nullptr);

struct AnnealResult {
  double beta = 0.0;
  std::vector<Vec> positions;
  bool accepted = false;  // false: schedule exhausted, beta = beta_final
  std::size_t rounds = 0;
  std::size_t inner_iterations = 0;
  std::size_t underflow_rows = 0;
  double min_distance = 0.0;
  std::vector<std::string> warnings;
};

/// Grows beta geometrically from beta_initial until the converged robot
/// placement keeps every pair at least d_min apart.
/// Works in the shape's local frame; the perturbation scale is set.spacing.
AnnealResult anneal_beta(const SamplePointSet& set, std::size_t n, const AnnealConfig& config,
                         Exec exec = default_exec());

}  // namespace msform
