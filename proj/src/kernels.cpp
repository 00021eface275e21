#include "msform/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "msform/error.hpp"
#include "msform/protocols.hpp"
#include "parallel.hpp"

namespace msform {

Exec default_exec() { return openmp_enabled() ? Exec::kParallel : Exec::kSerial; }

bool openmp_enabled() {
#ifdef MSFORM_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

namespace kernels {

namespace {

using detail::for_each_index;

void reference_row(const Vec& p, std::span<const Vec> samples, double beta,
                   std::span<double> row) {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    row[k] = std::exp(-beta * dist2(p, samples[k]));
  }
}

}  // namespace

void reference_signals(std::span<const Vec> positions,
                       std::span<const std::span<const Vec>> samples, const Kernel& kernel,
                       Matrix& out, Exec exec) {
  if (samples.size() != positions.size()) {
    throw ConfigError("one sample set per robot is required");
  }
  const std::size_t m = positions.empty() ? 0 : samples[0].size();
  if (out.rows() != positions.size() || out.cols() != m) out = Matrix(positions.size(), m);
  const double beta = kernel.beta();
  for_each_index(positions.size(), exec, [&](std::size_t i) {
    reference_row(positions[i], samples[i], beta, out.row(i));
  });
}

void reference_signals(std::span<const Vec> positions, std::span<const Vec> samples,
                       const Kernel& kernel, Matrix& out, Exec exec) {
  if (out.rows() != positions.size() || out.cols() != samples.size()) {
    out = Matrix(positions.size(), samples.size());
  }
  const double beta = kernel.beta();
  for_each_index(positions.size(), exec, [&](std::size_t i) {
    reference_row(positions[i], samples, beta, out.row(i));
  });
}

MassVector true_masses(std::span<const Vec> positions, std::span<const Vec> samples,
                       const Kernel& kernel, Exec exec) {
  if (positions.empty()) throw DomainError("mass is undefined for an empty swarm (n = 0)");
  MassVector out;
  out.values.assign(samples.size(), 0.0);
  const double beta = kernel.beta();
  const auto n = static_cast<double>(positions.size());
  for_each_index(samples.size(), exec, [&](std::size_t k) {
    double s = 0.0;
    for (const auto& p : positions) s += std::exp(-beta * dist2(samples[k], p));
    out.values[k] = s / n;
  });
  return out;
}

void estimator_increment(const Matrix& p_hat, const CommGraph& graph, double gamma, double dt,
                         EstimatorScheme scheme, Matrix& z, Exec exec) {
  const std::size_t n = p_hat.rows();
  const std::size_t m = p_hat.cols();
  const double step = gamma * dt;

  if (scheme == EstimatorScheme::kSignEuler) {
    for_each_index(n, exec, [&](std::size_t i) {
      // integer vote counts keep the update exact and order-independent
      std::vector<int> votes(m, 0);
      const auto self = p_hat.row(i);
      for (std::size_t j : graph.neighbors[i]) {
        const auto other = p_hat.row(j);
        for (std::size_t k = 0; k < m; ++k) {
          votes[k] += (other[k] > self[k]) - (other[k] < self[k]);
        }
      }
      auto zi = z.row(i);
      for (std::size_t k = 0; k < m; ++k) {
        if (votes[k] != 0) zi[k] += step * static_cast<double>(votes[k]);
      }
    });
    return;
  }

  for_each_index(n, exec, [&](std::size_t i) {
    std::vector<double> flow(m, 0.0);
    const auto self = p_hat.row(i);
    for (std::size_t j : graph.neighbors[i]) {
      const double w =
          1.0 / (1.0 + static_cast<double>(std::max(graph.degree(i), graph.degree(j))));
      const auto other = p_hat.row(j);
      for (std::size_t k = 0; k < m; ++k) {
        const double d = other[k] - self[k];
        const double mag = std::min(step, w * std::abs(d));
        flow[k] += d > 0.0 ? mag : (d < 0.0 ? -mag : 0.0);
      }
    }
    auto zi = z.row(i);
    for (std::size_t k = 0; k < m; ++k) zi[k] += flow[k];
  });
}

}  // namespace kernels
}  // namespace msform
