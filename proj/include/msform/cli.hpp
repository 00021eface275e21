#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msform/sim.hpp"

namespace msform::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kToolVersion = "0.3.0";

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path shape;
  std::optional<std::filesystem::path> events;
  std::optional<std::filesystem::path> polygon;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  bool oracle_mass = false;
  bool strict_gamma = false;
};

struct AnnealOptions {
  std::filesystem::path shape;
  std::size_t robots = 0;
  double d_min = 0.0;
  double beta_initial = 0.01;
  double beta_final = 150.0;
  double alpha_c = 1.025;
  double epsilon = 1e-3;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

struct ShapegenOptions {
  std::filesystem::path polygon;
  double d_pts = 0.0;
  std::filesystem::path out;
  std::optional<std::size_t> robots;
  double r_avoid = 1.0;
};

struct PlotdataOptions {
  std::filesystem::path metrics;
  std::string kind;
  std::filesystem::path out;
};

/// Writes trajectory.csv, metrics.csv and manifest.json into opts.out.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_anneal(const AnnealOptions& opts, std::ostream& out, std::ostream& err);
int cmd_shapegen(const ShapegenOptions& opts, std::ostream& out, std::ostream& err);
int cmd_plotdata(const PlotdataOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

/// %.17g rendering, independent of the C locale.
std::string fmt17(double v);

void write_trajectory(const std::filesystem::path& file, const TrajectoryLog& log,
                      const std::string& config_hash, std::uint64_t seed);
void write_metrics(const std::filesystem::path& file, const std::vector<MetricsRecord>& records,
                   const std::string& config_hash, std::uint64_t seed, double coverage_pitch);

/// Column name -> values, read back from a metrics file.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> column(const std::string& name) const;
};
MetricsTable read_metrics(const std::filesystem::path& file);

}  // namespace msform::cli
