#include "msform/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msform/error.hpp"

namespace msform {

namespace {
constexpr double kClampFloor = 1e-300;
}

void ControlParams::validate(double r_sense) const {
  if (!(sigma1 > 0.0)) throw ConfigError("sigma1 must be positive");
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must be in (0,1)");
  if (!(v_max > 0.0)) throw ConfigError("v_max must be positive");
  if (!(r_avoid > 0.0 && r_avoid < r_sense)) {
    throw ConfigError("r_avoid must be in (0, r_sense)");
  }
}

ControlDiagnostics& ControlDiagnostics::operator+=(const ControlDiagnostics& o) {
  kernel_evals += o.kernel_evals;
  neighbor_terms += o.neighbor_terms;
  coincident_neighbors += o.coincident_neighbors;
  clamped_estimates += o.clamped_estimates;
  return *this;
}

Vec meanshift_command(const Vec& p_i, std::span<const Vec> samples,
                      std::span<const double> p_hat_i, const Kernel& kernel,
                      const ControlParams& params, ControlDiagnostics* diag) {
  if (samples.empty()) throw ConfigError("no sample points");
  if (p_hat_i.size() != samples.size()) {
    throw ConfigError("estimate vector length does not match sample point count");
  }
  // psi enters as a ratio, so a common factor exp(beta * min_k r_k^2) cancels;
  // applying it keeps distant robots from underflowing every weight.
  double nearest2 = norm2(samples[0] - p_i);
  for (const auto& q : samples) nearest2 = std::min(nearest2, norm2(q - p_i));

  Vec num;
  double den = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    double est = p_hat_i[k];
    if (!(est > 0.0)) {
      if (!params.defensive_clamp || std::isnan(est)) {
        throw DomainError("mass estimate must be positive; k=" + std::to_string(k) +
                          " has value " + std::to_string(est));
      }
      est = kClampFloor;
      if (diag) ++diag->clamped_estimates;
    }
    const Vec offset = samples[k] - p_i;
    const double psi = kernel.weight_sq(norm2(offset) - nearest2) / est;
    num += psi * offset;
    den += psi;
  }
  if (diag) diag->kernel_evals += samples.size();
  if (!(den > 0.0) || !std::isfinite(den)) {
    throw DomainError("meanshift weights degenerate (sum " + std::to_string(den) + ")");
  }
  return num * (params.sigma1 / (static_cast<double>(samples.size()) * den));
}

Vec repulsion_raw(const Vec& p_i, std::span<const Vec> neighbors, const ControlParams& params,
                  ControlDiagnostics* diag) {
  Vec out;
  for (const auto& pj : neighbors) {
    const Vec diff = p_i - pj;
    const double d = norm(diff);
    if (d > params.r_avoid) continue;
    if (diag) {
      ++diag->neighbor_terms;
      if (d == 0.0) ++diag->coincident_neighbors;
    }
    out += ((params.r_avoid - d) / (d + params.eps)) * diff;
  }
  return out * params.sigma2;
}

double kappa2(const Vec& v_ms, const Vec& v_cv_raw, const ControlParams& params) {
  const double ms2 = norm2(v_ms);
  const double phi = std::min(ms2 / params.eps, 1.0);
  const double align = dot(v_ms, v_cv_raw);
  if (align >= 0.0) return phi;
  return phi * std::min(-(1.0 - params.eps) * ms2 / align, 1.0);
}

Vec saturate(const Vec& v, double v_max) {
  const double n = norm(v);
  if (n > v_max) return v * (v_max / n);
  return v;
}

VelocityCommand control_step(const Vec& p_i, std::span<const Vec> samples,
                             std::span<const double> p_hat_i,
                             std::span<const Vec> neighbor_positions, const Kernel& kernel,
                             const ControlParams& params, ControlDiagnostics* diag) {
  VelocityCommand cmd;
  cmd.v_ms = meanshift_command(p_i, samples, p_hat_i, kernel, params, diag);
  const Vec raw = repulsion_raw(p_i, neighbor_positions, params, diag);
  double gain = kappa2(cmd.v_ms, raw, params);
  // The gain meets <v_ms + v_cv, v_ms> >= eps |v_ms|^2 exactly in real arithmetic; in
  // doubles the sum can land a few ulps short when |raw| >> |v_ms|. Back off
  // by the observed shortfall until the evaluated inequality holds.
  const double align = dot(cmd.v_ms, raw);
  const double floor = params.eps * norm2(cmd.v_ms);
  for (int pass = 0; pass < 32 && align < 0.0 && gain > 0.0; ++pass) {
    const double short_by = floor - dot(cmd.v_ms + raw * gain, cmd.v_ms);
    if (short_by <= 0.0) break;
    // the step can be below one ulp of the gain, so it grows with each pass
    const double step = std::max(2.0 * short_by / -align, gain * std::ldexp(1e-16, pass));
    gain = std::max(0.0, gain - step);
  }
  cmd.v_cv = raw * gain;
  cmd.v = saturate(cmd.v_ms + cmd.v_cv, params.v_max);
  return cmd;
}

}  // namespace msform
