#include "msform/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "msform/anneal.hpp"
#include "msform/error.hpp"

namespace msform::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + file.string());
  return out;
}

const char* axis_name(int d) { return d == 0 ? "x" : (d == 1 ? "y" : "z"); }

// Maps exceptions onto the documented exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

ordered_json file_entry(const fs::path& p) {
  return {{"path", p.generic_string()}, {"sha256", sha256_file(p)}};
}

void write_positions(const fs::path& file, const std::vector<Vec>& positions, int dim,
                     const std::string& header) {
  auto out = open_out(file);
  out << "# " << header << "\n";
  for (const auto& p : positions) {
    for (int d = 0; d < dim; ++d) out << (d ? "," : "") << fmt17(p[d]);
    out << "\n";
  }
}

}  // namespace

void write_trajectory(const fs::path& file, const TrajectoryLog& log,
                      const std::string& config_hash, std::uint64_t seed) {
  auto out = open_out(file);
  out << "# msform trajectory\n# config_hash=" << config_hash << " seed=" << seed << "\n";
  out << "t,id";
  for (int d = 0; d < log.dim; ++d) out << "," << axis_name(d);
  for (int d = 0; d < log.dim; ++d) out << ",v" << axis_name(d);
  out << "\n";
  for (const auto& f : log.frames) {
    for (std::size_t i = 0; i < f.ids.size(); ++i) {
      out << fmt17(f.t) << "," << f.ids[i];
      for (int d = 0; d < log.dim; ++d) out << "," << fmt17(f.positions[i][d]);
      for (int d = 0; d < log.dim; ++d) out << "," << fmt17(f.velocities[i][d]);
      out << "\n";
    }
  }
}

void write_metrics(const fs::path& file, const std::vector<MetricsRecord>& records,
                   const std::string& config_hash, std::uint64_t seed, double coverage_pitch) {
  auto out = open_out(file);
  out << "# msform metrics\n# config_hash=" << config_hash << " seed=" << seed << "\n";
  out << "# coverage_pitch=" << fmt17(coverage_pitch) << "\n";
  out << "t,provisional,n,F,F_max,F_uni,F_est,F_max_est,F_uni_est,E_est,M_uni,M_cover,"
         "connected,min_pairwise_distance,max_speed,max_z_column_sum\n";
  for (const auto& r : records) {
    out << fmt17(r.t) << "," << (r.provisional ? 1 : 0) << "," << r.n << "," << fmt17(r.f) << ","
        << fmt17(r.f_max) << "," << fmt17(r.f_uni) << "," << fmt17(r.f_est) << ","
        << fmt17(r.f_max_est) << "," << fmt17(r.f_uni_est) << "," << fmt17(r.e_est) << ","
        << fmt17(r.m_uni) << "," << fmt17(r.m_cover) << "," << (r.connected ? 1 : 0) << ","
        << fmt17(r.min_pairwise_distance) << "," << fmt17(r.max_speed) << ","
        << fmt17(r.max_z_column_sum) << "\n";
  }
}

std::optional<std::size_t> MetricsTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return c;
  }
  return std::nullopt;
}

MetricsTable read_metrics(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open metrics file: " + file.string());
  MetricsTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (t.columns.empty()) {
      t.columns = std::move(fields);
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw ParseError("expected " + std::to_string(t.columns.size()) + " fields", lineno,
                       file.string());
    }
    std::vector<double> row;
    for (const auto& v : fields) {
      double x = 0.0;
      if (v == "nan") {
        x = std::nan("");
      } else if (v == "inf" || v == "-inf") {
        x = v[0] == '-' ? -INFINITY : INFINITY;
      } else {
        const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
          throw ParseError("malformed number '" + v + "'", lineno, file.string());
        }
      }
      row.push_back(x);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SimConfig config = load_config(opts.config);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.oracle_mass) config.oracle_mass = true;
    if (opts.strict_gamma) config.strict_gamma = true;
    config.validate();

    const SamplePointSet shape = load_points(opts.shape);
    EventSchedule events;
    if (opts.events) events = load_events(*opts.events, config.dim);
    std::optional<Polygon> polygon;
    if (opts.polygon) polygon = load_polygon(*opts.polygon);

    std::error_code ec;
    fs::create_directories(opts.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + opts.out.string());

    const RunResult result = run(config, shape, events, polygon);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";

    const std::string hash = config.hash();
    const double pitch = config.dim == 2 ? shape.spacing / 4.0 : std::nan("");
    const fs::path traj = opts.out / "trajectory.csv";
    const fs::path metrics = opts.out / "metrics.csv";
    write_trajectory(traj, result.trajectory, hash, config.seed);
    write_metrics(metrics, result.metrics, hash, config.seed, pitch);

    ordered_json m;
    m["tool"] = "msform";
    m["version"] = kToolVersion;
    m["command"] = "run";
    m["config"] = file_entry(opts.config);
    m["config_hash"] = hash;
    m["shape"] = file_entry(opts.shape);
    m["events"] = opts.events ? file_entry(*opts.events) : ordered_json(nullptr);
    m["polygon"] = opts.polygon ? file_entry(*opts.polygon) : ordered_json(nullptr);
    m["seed"] = config.seed;
    m["oracle_mass"] = config.oracle_mass;
    m["strict_gamma"] = config.strict_gamma;
    m["estimator_scheme"] =
        config.estimator_scheme == EstimatorScheme::kClippedSign ? "clipped" : "euler";
    m["coverage_pitch"] = config.dim == 2 ? ordered_json(pitch) : ordered_json(nullptr);
    m["steps"] = result.steps;
    const auto& first = result.metrics.front();
    const auto& last = result.metrics.back();
    m["records"] = {{"metrics", result.metrics.size()},
                    {"trajectory_frames", result.trajectory.frames.size()},
                    {"start_t", first.t},
                    {"end_t", last.t}};
    m["final"] = {{"n", last.n},
                  {"F", std::isfinite(last.f) ? ordered_json(last.f) : ordered_json(nullptr)},
                  {"E_est", last.e_est},
                  {"M_cover", std::isfinite(last.m_cover) ? ordered_json(last.m_cover)
                                                          : ordered_json(nullptr)}};
    m["t_conv"] = result.t_conv ? ordered_json(*result.t_conv) : ordered_json(nullptr);
    m["density"] = {{"ok", result.density.ok()}, {"summary", result.density.summary()}};
    m["warnings"] = result.warnings;
    m["outputs"] = {{{"file", "trajectory.csv"}, {"sha256", sha256_file(traj)}},
                    {{"file", "metrics.csv"}, {"sha256", sha256_file(metrics)}}};
    auto mf = open_out(opts.out / "manifest.json");
    mf << m.dump(2) << "\n";

    out << "steps=" << result.steps << " records=" << result.metrics.size()
        << " final_F=" << fmt17(last.f) << " t_conv="
        << (result.t_conv ? fmt17(*result.t_conv) : std::string("none")) << "\n";
    return kExitOk;
  });
}

int cmd_anneal(const AnnealOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SamplePointSet shape = load_points(opts.shape);
    AnnealConfig cfg;
    cfg.beta_initial = opts.beta_initial;
    cfg.beta_final = opts.beta_final;
    cfg.alpha_c = opts.alpha_c;
    cfg.epsilon_a = opts.epsilon;
    cfg.d_min = opts.d_min;
    cfg.seed = opts.seed;
    const AnnealResult r = anneal_beta(shape, opts.robots, cfg);
    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    out << "beta=" << fmt17(r.beta) << "\n";
    out << "accepted=" << (r.accepted ? "true" : "false") << " rounds=" << r.rounds
        << " min_distance=" << fmt17(r.min_distance) << "\n";
    if (!opts.out.empty()) {
      write_positions(opts.out, r.positions, shape.dim,
                      "anneal beta=" + fmt17(r.beta) + " n=" + std::to_string(opts.robots));
    }
    return kExitOk;
  });
}

int cmd_shapegen(const ShapegenOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Polygon poly = load_polygon(opts.polygon);
    const SamplePointSet set = discretize_polygon(poly, opts.d_pts);
    write_points(opts.out, set);
    out << "m=" << set.size() << " d_pts=" << fmt17(set.spacing) << "\n";
    if (opts.robots) {
      const DensityReport rep = validate_density(set, *opts.robots, opts.r_avoid);
      out << "density: " << rep.summary() << "\n";
    }
    return kExitOk;
  });
}

int cmd_plotdata(const PlotdataOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    static const char* kinds[] = {"F", "E_est", "M_uni", "M_cover"};
    if (std::find(std::begin(kinds), std::end(kinds), opts.kind) == std::end(kinds)) {
      throw ConfigError("unknown plot kind '" + opts.kind + "' (expected F, E_est, M_uni, M_cover)");
    }
    const MetricsTable table = read_metrics(opts.metrics);
    if (table.rows.empty()) throw ConfigError("metrics log has no records: " + opts.metrics.string());
    const auto t_col = table.column("t");
    const auto v_col = table.column(opts.kind);
    if (!t_col || !v_col) throw ConfigError("metrics log lacks column '" + opts.kind + "'");
    auto f = open_out(opts.out);
    f << "t," << opts.kind << "\n";
    for (const auto& row : table.rows) f << fmt17(row[*t_col]) << "," << fmt17(row[*v_col]) << "\n";
    out << "wrote " << table.rows.size() << " points to " << opts.out.string() << "\n";
    return kExitOk;
  });
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized shape formation simulator"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string events, polygon;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write logs");
  run->add_option("--config", run_opts.config, "key=value scenario file")->required();
  run->add_option("--shape", run_opts.shape, "sample-point file")->required();
  run->add_option("--events", events, "membership event file");
  run->add_option("--polygon", polygon, "shape polygon for coverage and convergence time");
  run->add_option("--out", run_opts.out, "output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_flag("--oracle-mass", run_opts.oracle_mass, "feed true masses to the controllers");
  run->add_flag("--strict-gamma", run_opts.strict_gamma, "reject gamma below min_gamma");

  AnnealOptions an;
  auto* anneal = app.add_subcommand("anneal", "Select beta by deterministic annealing");
  anneal->add_option("--shape", an.shape, "sample-point file")->required();
  anneal->add_option("--robots,-n", an.robots, "number of robots")->required();
  anneal->add_option("--d-min", an.d_min, "minimum inter-robot distance");
  anneal->add_option("--beta-initial", an.beta_initial);
  anneal->add_option("--beta-final", an.beta_final);
  anneal->add_option("--alpha-c", an.alpha_c, "cooling rate (> 1)");
  anneal->add_option("--epsilon", an.epsilon, "inner-loop tolerance");
  anneal->add_option("--seed", an.seed);
  anneal->add_option("--out", an.out, "final positions file");

  ShapegenOptions sg;
  std::size_t robots = 0;
  auto* shapegen = app.add_subcommand("shapegen", "Discretize a polygon into sample points");
  shapegen->add_option("--polygon", sg.polygon, "polygon vertex file")->required();
  shapegen->add_option("--d-pts", sg.d_pts, "grid spacing")->required();
  shapegen->add_option("--out", sg.out, "sample-point file to write")->required();
  auto* robots_opt = shapegen->add_option("--robots", robots, "report density for n robots");
  shapegen->add_option("--r-avoid", sg.r_avoid);

  PlotdataOptions pd;
  auto* plot = app.add_subcommand("plotdata", "Extract a (t, value) series from a metrics log");
  plot->add_option("--metrics", pd.metrics, "metrics.csv from run")->required();
  plot->add_option("--kind", pd.kind, "F, E_est, M_uni or M_cover")->required();
  plot->add_option("--out", pd.out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    if (!events.empty()) run_opts.events = events;
    if (!polygon.empty()) run_opts.polygon = polygon;
    if (seed_opt->count() > 0) run_opts.seed = seed;
    return cmd_run(run_opts, out, err);
  }
  if (anneal->parsed()) return cmd_anneal(an, out, err);
  if (shapegen->parsed()) {
    if (robots_opt->count() > 0) sg.robots = robots;
    return cmd_shapegen(sg, out, err);
  }
  return cmd_plotdata(pd, out, err);
}

}  // namespace msform::cli
