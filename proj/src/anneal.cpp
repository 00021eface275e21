#include "msform/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "msform/error.hpp"
#include "msform/metrics.hpp"
#include "parallel.hpp"

namespace msform {

void AnnealConfig::validate() const {
  if (!(beta_initial > 0.0) || !(beta_initial < beta_final) || !std::isfinite(beta_final)) {
    throw ConfigError("anneal needs 0 < beta_initial < beta_final < inf");
  }
  if (!(alpha_c > 1.0)) throw ConfigError("anneal cooling rate alpha_c must exceed 1");
  if (!(epsilon_a > 0.0)) throw ConfigError("anneal tolerance epsilon_a must be positive");
  if (!(d_min >= 0.0) || !std::isfinite(d_min)) throw ConfigError("d_min must be finite and >= 0");
  if (max_inner_iterations == 0) throw ConfigError("max_inner_iterations must be >= 1");
}

Matrix e_step(std::span<const Vec> robots, std::span<const Vec> samples, double beta,
              Exec exec, std::size_t* underflow_rows) {
  if (robots.empty()) throw ConfigError("e_step needs at least one robot");
  const std::size_t n = robots.size();
  Matrix a(samples.size(), n);
  std::vector<char> fallback(samples.size(), 0);
  detail::for_each_index(samples.size(), exec, [&](std::size_t k) {
    auto row = a.row(k);
    // Shifting by the nearest robot leaves the ratios unchanged and keeps
    // the largest weight at exactly 1.
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = dist2(samples[k], robots[i]);
      nearest = std::min(nearest, row[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = std::exp(-beta * (row[i] - nearest));
      total += row[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(n));
      fallback[k] = 1;
      return;
    }
    for (std::size_t i = 0; i < n; ++i) row[i] /= total;
  });
  if (underflow_rows) {
    *underflow_rows += static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), 1));
  }
  return a;
}

std::vector<Vec> m_step(std::span<const Vec> samples, const Matrix& assoc,
                        std::span<const Vec> previous, Exec exec) {
  if (assoc.rows() != samples.size() || assoc.cols() != previous.size()) {
    throw ConfigError("association matrix does not match sample and robot counts");
  }
  std::vector<Vec> out(previous.begin(), previous.end());
  detail::for_each_index(previous.size(), exec, [&](std::size_t i) {
    Vec num;
    double den = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double w = assoc(k, i);
      num += samples[k] * w;
      den += w;
    }
    if (den > 0.0) out[i] = num / den;
  });
  return out;
}

InnerResult anneal_inner(std::span<const Vec> samples, std::vector<Vec> start, double beta,
                         const AnnealConfig& config, Exec exec, std::size_t* underflow_rows) {
  InnerResult r;
  r.positions = std::move(start);
  while (r.iterations < config.max_inner_iterations) {
    const Matrix a = e_step(r.positions, samples, beta, exec, underflow_rows);
    std::vector<Vec> next = m_step(samples, a, r.positions, exec);
    double moved = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) moved = std::max(moved, dist(next[i], r.positions[i]));
    r.positions = std::move(next);
    ++r.iterations;
    if (moved < config.epsilon_a) {
      r.converged = true;
      break;
    }
  }
  return r;
}

namespace {

void perturb(std::vector<Vec>& positions, int dim, double magnitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& p : positions) {
    for (int d = 0; d < dim; ++d) p[d] += magnitude * u(rng);
  }
}

}  // namespace

AnnealResult anneal_beta(const SamplePointSet& set, std::size_t n, const AnnealConfig& config,
                         Exec exec) {
  config.validate();
  if (n == 0) throw ConfigError("anneal needs n >= 1");
  if (set.size() == 0) throw ConfigError("anneal needs at least one sample point");
  const std::span<const Vec> samples = set.points_local;

  Vec centroid;
  for (const auto& q : samples) centroid += q;
  centroid = centroid / static_cast<double>(samples.size());

  const int dim = set.dim;
  const double jitter = 1e-6 * set.spacing;
  std::mt19937_64 rng(config.seed);

  AnnealResult out;
  std::vector<Vec> positions(n, centroid);
  if (n > 1) perturb(positions, dim, jitter, rng);

  double beta = config.beta_initial;
  while (beta < config.beta_final) {
    ++out.rounds;
    InnerResult inner = anneal_inner(samples, std::move(positions), beta, config, exec,
                                     &out.underflow_rows);
    out.inner_iterations += inner.iterations;
    positions = std::move(inner.positions);
    if (!inner.converged) {
      std::ostringstream os;
      os << "inner loop hit the iteration cap at beta=" << beta;
      out.warnings.push_back(os.str());
    }
    const double d = min_pairwise_distance(positions);
    if (d >= config.d_min) {
      if (out.underflow_rows > 0) {
        out.warnings.push_back("association rows fell back to uniform weights");
      }
      out.beta = beta;
      out.accepted = true;
      out.min_distance = d;
      out.positions = std::move(positions);
      return out;
    }
    beta *= config.alpha_c;
    // coincident robots never separate under exact EM, so the symmetry
    // breaking is renewed every round
    perturb(positions, dim, jitter, rng);
  }

  out.beta = config.beta_final;
  out.accepted = false;
  out.min_distance = min_pairwise_distance(positions);
  out.positions = std::move(positions);
  out.warnings.push_back("annealing schedule exhausted before reaching d_min");
  if (out.underflow_rows > 0) {
    out.warnings.push_back("association rows fell back to uniform weights");
  }
  return out;
}

}  // namespace msform
