#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msform/cli.hpp"
#include "msform/shape.hpp"

namespace fs = std::filesystem;
using namespace msform;

namespace {

const fs::path kData = MSFORM_TEST_DATA;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "msform");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("msform_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kShortRun =
    "n0 = 6\n"
    "duration = 1.5\n"
    "init_min = 0,0\n"
    "init_max = 4,4\n"
    "gamma = 20\n"
    "estimator_scheme = clipped\n"
    "seed = 3\n";

}  // namespace

TEST_CASE("run") {
  const fs::path dir = scratch("run");
  write_file(dir / "short.cfg", kShortRun);

  SUBCASE("writes the three outputs, repeatably") {
    const auto a = invoke({"run", "--config", (dir / "short.cfg").string(), "--shape",
                           (kData / "square.txt").string(), "--out", (dir / "a").string()});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("steps=150") != std::string::npos);
    for (const char* f : {"trajectory.csv", "metrics.csv", "manifest.json"}) {
      CHECK(fs::exists(dir / "a" / f));
    }
    const auto b = invoke({"run", "--config", (dir / "short.cfg").string(), "--shape",
                           (kData / "square.txt").string(), "--out", (dir / "b").string()});
    REQUIRE(b.code == 0);
    for (const char* f : {"trajectory.csv", "metrics.csv", "manifest.json"}) {
      CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
    }
    const std::string traj = read_file(dir / "a" / "trajectory.csv");
    CHECK(traj.find("\n# config_hash=") != std::string::npos);
    CHECK(traj.find("seed=3") != std::string::npos);

    const auto t = cli::read_metrics(dir / "a" / "metrics.csv");
    CHECK(t.rows.size() == 16);
    REQUIRE(t.column("F").has_value());

    // a different seed changes the output
    const auto c = invoke({"run", "--config", (dir / "short.cfg").string(), "--shape",
                           (kData / "square.txt").string(), "--out", (dir / "c").string(),
                           "--seed", "4"});
    REQUIRE(c.code == 0);
    CHECK(read_file(dir / "a" / "trajectory.csv") != read_file(dir / "c" / "trajectory.csv"));
  }
  SUBCASE("missing shape file") {
    const auto r = invoke({"run", "--config", (dir / "short.cfg").string(), "--shape",
                           (dir / "nowhere.txt").string(), "--out", (dir / "x").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("nowhere.txt") != std::string::npos);
  }
  SUBCASE("strict gain check") {
    write_file(dir / "low.cfg", "n0 = 6\ngamma = 0.01\nduration = 1\n");
    const auto r = invoke({"run", "--config", (dir / "low.cfg").string(), "--shape",
                           (kData / "square.txt").string(), "--out", (dir / "y").string(),
                           "--strict-gamma"});
    CHECK(r.code == 2);
    CHECK(r.err.find("min_gamma") != std::string::npos);
  }
  SUBCASE("bad config and usage") {
    write_file(dir / "bad.cfg", "n0 = 6\nbogus_key = 1\n");
    const auto r = invoke({"run", "--config", (dir / "bad.cfg").string(), "--shape",
                           (kData / "square.txt").string(), "--out", (dir / "z").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("bogus_key") != std::string::npos);
    CHECK(invoke({"run", "--config"}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({}).code == 2);
  }
}

TEST_CASE("shapegen") {
  const fs::path dir = scratch("shapegen");
  SUBCASE("unit square at 0.5") {
    write_file(dir / "sq.txt", "0,0\n1,0\n1,1\n0,1\n");
    const auto r = invoke({"shapegen", "--polygon", (dir / "sq.txt").string(), "--d-pts", "0.5",
                           "--out", (dir / "pts.txt").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("m=4") != std::string::npos);
    const auto set = load_points(dir / "pts.txt");
    CHECK(set.size() == 4);
    CHECK(set.spacing == 0.5);
  }
  SUBCASE("density report") {
    write_file(dir / "big.txt", "0,0\n10,0\n10,10\n0,10\n");
    const auto r = invoke({"shapegen", "--polygon", (dir / "big.txt").string(), "--d-pts", "1",
                           "--out", (dir / "pts.txt").string(), "--robots", "20"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("m=100") != std::string::npos);
    CHECK(r.out.find("density:") != std::string::npos);
  }
  SUBCASE("degenerate polygon") {
    write_file(dir / "flat.txt", "0,0\n1,0\n2,0\n");
    const auto r = invoke({"shapegen", "--polygon", (dir / "flat.txt").string(), "--d-pts", "0.5",
                           "--out", (dir / "pts.txt").string()});
    CHECK(r.code == 2);
  }
}

TEST_CASE("plotdata") {
  const fs::path dir = scratch("plotdata");
  write_file(dir / "short.cfg", kShortRun);
  REQUIRE(invoke({"run", "--config", (dir / "short.cfg").string(), "--shape",
                  (kData / "square.txt").string(), "--out", (dir / "run").string(), "--oracle-mass"})
              .code == 0);
  const auto r = invoke({"plotdata", "--metrics", (dir / "run" / "metrics.csv").string(), "--kind",
                         "F", "--out", (dir / "f.csv").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "f.csv");
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "t,F");
  std::vector<double> values;
  while (std::getline(in, line)) values.push_back(std::stod(line.substr(line.find(',') + 1)));
  REQUIRE(values.size() == 16);
  CHECK(values.back() <= values.front());

  CHECK(invoke({"plotdata", "--metrics", (dir / "run" / "metrics.csv").string(), "--kind", "G",
                "--out", (dir / "g.csv").string()})
            .code == 2);
  write_file(dir / "empty.csv", "# config_hash=x seed=1\nt,F\n");
  CHECK(invoke({"plotdata", "--metrics", (dir / "empty.csv").string(), "--kind", "F", "--out",
                (dir / "e.csv").string()})
            .code == 2);
}

TEST_CASE("anneal") {
  const fs::path dir = scratch("anneal");
  const auto one = invoke({"anneal", "--shape", (kData / "square.txt").string(), "--robots", "1",
                           "--d-min", "0.5"});
  REQUIRE(one.code == 0);
  CHECK(one.out.rfind("beta=0.01\n", 0) == 0);
  const auto four = invoke({"anneal", "--shape", (kData / "square.txt").string(), "--robots", "4",
                            "--d-min", "2", "--out", (dir / "p.txt").string()});
  REQUIRE(four.code == 0);
  CHECK(four.out.find("accepted=true") != std::string::npos);
  CHECK(load_points(dir / "p.txt").size() == 4);
  CHECK(invoke({"anneal", "--shape", (kData / "square.txt").string(), "--robots", "2",
                "--alpha-c", "0.9"})
            .code == 2);
}
