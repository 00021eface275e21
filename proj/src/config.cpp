#include "msform/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "msform/error.hpp"

namespace msform {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError("expected a number, got '" + v + "'");
  if (!std::isfinite(out)) throw ConfigError("value must be finite, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("integer out of range: '" + v + "'");
  }
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true/false, got '" + v + "'");
}

Vec to_vec(const std::string& v) {
  Vec out;
  std::stringstream ss(v);
  std::string field;
  int d = 0;
  while (std::getline(ss, field, ',')) {
    if (d >= kMaxDim) throw ConfigError("too many components in '" + v + "'");
    out[d++] = to_double(trim(field));
  }
  if (d == 0) throw ConfigError("empty vector value");
  return out;
}

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string vec_str(const Vec& v, int dim) {
  std::string s;
  for (int d = 0; d < dim; ++d) {
    if (d > 0) s += ',';
    s += fmt17(v[d]);
  }
  return s;
}

using Setter = std::function<void(SimConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dim", [](SimConfig& c, const std::string& v) { c.dim = static_cast<int>(to_uint(v)); }},
      {"n0", [](SimConfig& c, const std::string& v) { c.n0 = to_uint(v); }},
      {"dt_ctrl", [](SimConfig& c, const std::string& v) { c.dt_ctrl = to_double(v); }},
      {"estimator_substeps",
       [](SimConfig& c, const std::string& v) { c.estimator_substeps = to_uint(v); }},
      {"duration", [](SimConfig& c, const std::string& v) { c.duration = to_double(v); }},
      {"r_sense", [](SimConfig& c, const std::string& v) { c.r_sense = to_double(v); }},
      {"r_avoid", [](SimConfig& c, const std::string& v) { c.r_avoid = to_double(v); }},
      {"v_max", [](SimConfig& c, const std::string& v) { c.v_max = to_double(v); }},
      {"beta", [](SimConfig& c, const std::string& v) { c.beta = to_double(v); }},
      {"c1", [](SimConfig& c, const std::string& v) { c.c1 = to_double(v); }},
      {"c2", [](SimConfig& c, const std::string& v) { c.c2 = to_double(v); }},
      {"alpha", [](SimConfig& c, const std::string& v) { c.alpha = to_double(v); }},
      {"gamma", [](SimConfig& c, const std::string& v) { c.gamma = to_double(v); }},
      {"estimator_scheme",
       [](SimConfig& c, const std::string& v) {
         if (v == "euler") {
           c.estimator_scheme = EstimatorScheme::kSignEuler;
         } else if (v == "clipped") {
           c.estimator_scheme = EstimatorScheme::kClippedSign;
         } else {
           throw ConfigError("estimator_scheme must be euler or clipped, got '" + v + "'");
         }
       }},
      {"sigma1", [](SimConfig& c, const std::string& v) { c.sigma1 = to_double(v); }},
      {"sigma2", [](SimConfig& c, const std::string& v) { c.sigma2 = to_double(v); }},
      {"eps", [](SimConfig& c, const std::string& v) { c.eps = to_double(v); }},
      {"defensive_clamp",
       [](SimConfig& c, const std::string& v) { c.defensive_clamp = to_bool(v); }},
      {"seed", [](SimConfig& c, const std::string& v) { c.seed = to_uint(v); }},
      {"init_min", [](SimConfig& c, const std::string& v) { c.init_min = to_vec(v); }},
      {"init_max", [](SimConfig& c, const std::string& v) { c.init_max = to_vec(v); }},
      {"theta_init",
       [](SimConfig& c, const std::string& v) {
         if (v == "constant") {
           c.theta_init = ThetaInit::kConstant;
         } else if (v == "random") {
           c.theta_init = ThetaInit::kRandom;
         } else {
           throw ConfigError("theta_init must be constant or random, got '" + v + "'");
         }
       }},
      {"theta0", [](SimConfig& c, const std::string& v) { c.theta0 = to_double(v); }},
      {"negotiation_tol",
       [](SimConfig& c, const std::string& v) { c.negotiation_tol = to_double(v); }},
      {"metrics_every", [](SimConfig& c, const std::string& v) { c.metrics_every = to_uint(v); }},
      {"trajectory_every",
       [](SimConfig& c, const std::string& v) { c.trajectory_every = to_uint(v); }},
      {"strict_gamma", [](SimConfig& c, const std::string& v) { c.strict_gamma = to_bool(v); }},
      {"oracle_mass", [](SimConfig& c, const std::string& v) { c.oracle_mass = to_bool(v); }},
  };
  return table;
}

}  // namespace

ControlParams SimConfig::control_params() const {
  ControlParams p;
  p.sigma1 = sigma1;
  p.sigma2 = sigma2;
  p.eps = eps;
  p.r_avoid = r_avoid;
  p.v_max = v_max;
  p.defensive_clamp = defensive_clamp;
  return p;
}

NegotiationGains SimConfig::negotiation_gains() const { return {c1, c2, alpha}; }

void SimConfig::validate() const {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("dim must be 1, 2 or 3");
  if (n0 < 1) throw ConfigError("n0 must be at least 1");
  if (!(dt_ctrl > 0.0)) throw ConfigError("dt_ctrl must be positive");
  if (estimator_substeps < 1) throw ConfigError("estimator_substeps must be at least 1");
  if (!(duration >= 0.0)) throw ConfigError("duration must be non-negative");
  if (!(r_sense > 0.0)) throw ConfigError("r_sense must be positive");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(negotiation_tol > 0.0)) throw ConfigError("negotiation_tol must be positive");
  if (metrics_every < 1 || trajectory_every < 1) {
    throw ConfigError("metrics_every and trajectory_every must be at least 1");
  }
  for (int d = 0; d < dim; ++d) {
    if (init_min[d] > init_max[d]) throw ConfigError("init box is empty (init_min > init_max)");
  }
  negotiation_gains().validate();
  control_params().validate(r_sense);
}

std::string SimConfig::canonical() const {
  std::ostringstream os;
  os << "alpha=" << fmt17(alpha) << '\n'
     << "beta=" << fmt17(beta) << '\n'
     << "c1=" << fmt17(c1) << '\n'
     << "c2=" << fmt17(c2) << '\n'
     << "defensive_clamp=" << (defensive_clamp ? "true" : "false") << '\n'
     << "dim=" << dim << '\n'
     << "dt_ctrl=" << fmt17(dt_ctrl) << '\n'
     << "duration=" << fmt17(duration) << '\n'
     << "eps=" << fmt17(eps) << '\n'
     << "estimator_scheme="
     << (estimator_scheme == EstimatorScheme::kSignEuler ? "euler" : "clipped") << '\n'
     << "estimator_substeps=" << estimator_substeps << '\n'
     << "gamma=" << fmt17(gamma) << '\n'
     << "init_max=" << vec_str(init_max, dim) << '\n'
     << "init_min=" << vec_str(init_min, dim) << '\n'
     << "metrics_every=" << metrics_every << '\n'
     << "n0=" << n0 << '\n'
     << "negotiation_tol=" << fmt17(negotiation_tol) << '\n'
     << "oracle_mass=" << (oracle_mass ? "true" : "false") << '\n'
     << "r_avoid=" << fmt17(r_avoid) << '\n'
     << "r_sense=" << fmt17(r_sense) << '\n'
     << "seed=" << seed << '\n'
     << "sigma1=" << fmt17(sigma1) << '\n'
     << "sigma2=" << fmt17(sigma2) << '\n'
     << "strict_gamma=" << (strict_gamma ? "true" : "false") << '\n'
     << "theta0=" << fmt17(theta0) << '\n'
     << "theta_init=" << (theta_init == ThetaInit::kConstant ? "constant" : "random") << '\n'
     << "trajectory_every=" << trajectory_every << '\n'
     << "v_max=" << fmt17(v_max) << '\n';
  return os.str();
}

std::string SimConfig::hash() const { return sha256_hex(canonical()); }

SimConfig parse_config(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const auto& table = setters();
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw ParseError("unknown config key '" + key + "'", lineno);
    try {
      it->second(cfg, value);
    } catch (const ParseError&) {
      throw;
    } catch (const ConfigError& e) {
      throw ParseError(key + ": " + e.what(), lineno);
    }
  }
  return cfg;
}

SimConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), file.string());
  }
}

// ---------------------------------------------------------------------------

EventSchedule parse_events(const std::string& text, int dim) {
  EventSchedule schedule;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  double last_time = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls(t);
    std::string time_str;
    std::string action;
    ls >> time_str >> action;
    std::string rest;
    std::getline(ls, rest);
    rest = trim(rest);
    SimEvent ev;
    try {
      ev.time = to_double(time_str);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
    if (ev.time < last_time) throw ParseError("event times must be non-decreasing", lineno);
    last_time = ev.time;
    if (rest.empty()) throw ParseError("event '" + action + "' needs arguments", lineno);

    try {
      if (action == "add") {
        ev.kind = SimEvent::Kind::kAdd;
        if (rest.rfind("random:", 0) == 0) {
          ev.random_count = to_uint(rest.substr(7));
          if (ev.random_count == 0) throw ConfigError("random add count must be positive");
        } else {
          std::stringstream ps(rest);
          std::string point;
          while (std::getline(ps, point, ';')) {
            const std::string p = trim(point);
            if (p.empty()) throw ConfigError("empty position");
            const auto commas = static_cast<int>(std::count(p.begin(), p.end(), ','));
            if (commas + 1 != dim) {
              throw ConfigError("position '" + p + "' does not have " + std::to_string(dim) +
                                " components");
            }
            ev.positions.push_back(to_vec(p));
          }
        }
      } else if (action == "remove") {
        ev.kind = SimEvent::Kind::kRemove;
        std::stringstream ids(rest);
        std::string id;
        while (std::getline(ids, id, ',')) ev.ids.push_back(to_uint(trim(id)));
      } else {
        throw ConfigError("unknown event action '" + action + "' (expected add or remove)");
      }
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
    schedule.events.push_back(std::move(ev));
  }
  return schedule;
}

EventSchedule load_events(const std::filesystem::path& file, int dim) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open events file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_events(buf.str(), dim);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), file.string());
  }
}

// ---------------------------------------------------------------------------

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for hashing: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

}  // namespace msform
