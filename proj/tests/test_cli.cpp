#include <doctest.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chermnykh/app.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using chermnykh::testing::ScratchDir;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult invoke(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"chermnykh"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  RunResult r;
  r.code = chermnykh::app::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path) { return json::parse(slurp(path)); }

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

bool empty_or_missing(const fs::path& dir) { return !fs::exists(dir) || fs::is_empty(dir); }

const json& point(const json& doc, const std::string& label) {
  for (const auto& p : doc["points"])
    if (p["label"] == label) return p;
  FAIL("missing point " << label);
  return doc;
}

}  // namespace

TEST_CASE("equilibria for the classical problem") {
  ScratchDir dir("eq");
  const auto r = invoke({"equilibria", "--mu", "0.025", "--out", dir.path().string()});
  REQUIRE(r.code == 0);
  const json doc = read_json(dir.path() / "equilibria.json");
  CHECK(doc["command"] == "equilibria");
  CHECK(doc["parameters"]["mu"].get<double>() == 0.025);
  const json& l4 = point(doc, "L4");
  CHECK(l4["refined"]["x"].get<double>() == doctest::Approx(0.475).epsilon(1e-12));
  CHECK(l4["refined"]["y"].get<double>() == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
  CHECK(point(doc, "L5")["refined"]["y"].get<double>() == -l4["refined"]["y"].get<double>());
  CHECK(l4["C"].get<double>() == doctest::Approx(2.975625).epsilon(1e-12));
  CHECK(r.out.find("equilibria.json") != std::string::npos);
}

TEST_CASE("equilibria for the Sun-Earth mass ratio") {
  ScratchDir dir("se");
  REQUIRE(invoke({"equilibria", "--mu", "3.00348e-6", "--out", dir.path().string()}).code == 0);
  const json doc = read_json(dir.path() / "equilibria.json");
  CHECK(std::abs(point(doc, "L1")["refined"]["x"].get<double>() - 0.98997) < 1e-4);
}

TEST_CASE("configuration errors exit 2 and write nothing") {
  ScratchDir dir("cfg");
  const fs::path out = dir.path() / "out";
  CHECK(invoke({"equilibria", "--mu", "0.025", "--q1", "1.5", "--out", out.string()}).code == 2);
  CHECK(empty_or_missing(out));
  CHECK(invoke({"equilibria", "--q1", "0.9", "--out", out.string()}).code == 2);
  CHECK(invoke({"equilibria", "--mu", "0.02", "--q1", "0.9", "--epsilon", "0.1", "--out", out.string()}).code == 2);
  CHECK(invoke({"equilibria", "--mu", "0.02", "--format", "xml", "--out", out.string()}).code == 2);
  CHECK(invoke({"nonsense"}).code == 2);
  CHECK(empty_or_missing(out));

  write_file(dir.path() / "typo.ini", "[model]\nmu = 0.02\nmass = 3\n");
  const auto typo = invoke({"equilibria", "--config", (dir.path() / "typo.ini").string(), "--out", out.string()});
  CHECK(typo.code == 2);
  CHECK(typo.err.find("mass") != std::string::npos);
  write_file(dir.path() / "section.ini", "[model]\nmu = 0.02\n[extra]\nx = 1\n");
  CHECK(invoke({"equilibria", "--config", (dir.path() / "section.ini").string(), "--out", out.string()}).code == 2);
  write_file(dir.path() / "both.ini", "[model]\nmu = 0.02\nq1 = 0.9\nepsilon = 0.1\n");
  CHECK(invoke({"equilibria", "--config", (dir.path() / "both.ini").string(), "--out", out.string()}).code == 2);
  CHECK(invoke({"equilibria", "--config", (dir.path() / "absent.ini").string()}).code == 2);
  CHECK(empty_or_missing(out));
}

TEST_CASE("computation errors exit 3 and write nothing") {
  ScratchDir dir("comp");
  const fs::path out = dir.path() / "out";
  const auto r = invoke({"normalform", "--mu", "0.05", "--out", out.string()});
  CHECK(r.code == 3);
  CHECK_FALSE(r.err.empty());
  CHECK(empty_or_missing(out));
}

TEST_CASE("config file with flag overrides") {
  ScratchDir dir("override");
  write_file(dir.path() / "run.ini", "[model]\nmu = 0.3\nq1 = 0.9\n[output]\nout = results\n");
  REQUIRE(invoke({"equilibria", "--config", (dir.path() / "run.ini").string(), "--mu", "0.01"}).code == 0);
  const json doc = read_json(dir.path() / "results" / "equilibria.json");
  CHECK(doc["parameters"]["mu"].get<double>() == 0.01);
  CHECK(doc["parameters"]["q1"].get<double>() == 0.9);
}

TEST_CASE("single-point stability") {
  ScratchDir dir("stab");
  REQUIRE(invoke({"stability", "--mu", "0.01", "--out", dir.path().string()}).code == 0);
  const json doc = read_json(dir.path() / "stability.json");
  const json& exact = doc["point"]["exact"];
  CHECK(exact["stable"].get<bool>());
  CHECK(exact["omega1"].get<double>() == doctest::Approx(0.96332).epsilon(1e-5));
  CHECK(exact["omega2"].get<double>() == doctest::Approx(0.26835).epsilon(1e-4));
  CHECK(doc["point"]["critical_mass"]["numeric"].get<double>() == doctest::Approx(0.0385209).epsilon(1e-6));
  CHECK(doc.contains("audit"));
}

TEST_CASE("mass-ratio sweep locates the classical boundary") {
  ScratchDir dir("sweep");
  write_file(dir.path() / "sweep.ini",
             "[model]\nmu = 0.01\n[stability]\nsweep = mu\nmu_min = 0.03\nmu_max = 0.05\nmu_steps = 41\n");
  REQUIRE(invoke({"stability", "--config", (dir.path() / "sweep.ini").string(), "--out", dir.path().string()}).code == 0);
  const json doc = read_json(dir.path() / "stability.json");
  const json& b = doc["sweep"]["boundary"];
  const double lo = b["last_stable_mu"].get<double>();
  const double hi = b["first_unstable_mu"].get<double>();
  CHECK(lo <= 0.0385209);
  CHECK(hi >= 0.0385209);
  CHECK(hi - lo == doctest::Approx(0.0005).epsilon(1e-9));
  const std::string atlas = slurp(dir.path() / "atlas.csv");
  CHECK(atlas.rfind("# command=stability\n", 0) == 0);
  CHECK(atlas.find("\nmu,E,F,G,D,omega1,omega2,verdict,error\n") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
  ScratchDir dir("det");
  write_file(dir.path() / "atlas.ini",
             "[model]\nmu = 0.01\n[stability]\nsweep = atlas\na2_steps = 4\nmb_steps = 3\n");
  const std::string cfg = (dir.path() / "atlas.ini").string();
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  REQUIRE(invoke({"stability", "--config", cfg, "--threads", "1", "--out", a.string()}).code == 0);
  REQUIRE(invoke({"stability", "--config", cfg, "--threads", "4", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "atlas.csv") == slurp(b / "atlas.csv"));
  CHECK(slurp(a / "stability.json") == slurp(b / "stability.json"));

  REQUIRE(invoke({"zvc", "--mu", "0.025", "--resolution", "64", "--threads", "1", "--out", a.string()}).code == 0);
  REQUIRE(invoke({"zvc", "--mu", "0.025", "--resolution", "64", "--threads", "3", "--out", b.string()}).code == 0);
  for (const char* name : {"zvc_00.csv", "zvc_01.csv", "zvc_02.csv", "zvc_03.csv"}) CHECK(slurp(a / name) == slurp(b / name));
}

TEST_CASE("zero-velocity curves around the triangular level") {
  ScratchDir dir("zvc");
  REQUIRE(invoke({"zvc", "--mu", "0.025", "--level", "L4-1e-3", "--level", "L4+1e-3", "--level", "3.5",
                  "--resolution", "128", "--out", dir.path().string()})
              .code == 0);
  // L4 minimizes 2 Omega, so nothing is forbidden just below its level.
  const std::string below = slurp(dir.path() / "zvc_00.csv");
  CHECK(below.find("# polylines=0\n") != std::string::npos);
  const std::string above = slurp(dir.path() / "zvc_01.csv");
  CHECK(above.find("# closed=2\n") != std::string::npos);
  const std::string oval = slurp(dir.path() / "zvc_02.csv");
  CHECK(oval.rfind("# level=3.5\n", 0) == 0);
  CHECK(oval.find("# mu=0.025000000000000001\n") != std::string::npos);
  CHECK(oval.find("# closed=3\n") != std::string::npos);
  CHECK(oval.find("\nx,y\n") != std::string::npos);
}

TEST_CASE("orbit from rest at the triangular point") {
  ScratchDir dir("orbit");
  write_file(dir.path() / "orbit.ini", "[model]\nmu = 0.01\n[orbit]\nx = 0\nt_end = 20\nrel_tol = 1e-12\nstride = 1\n");
  REQUIRE(invoke({"orbit", "--config", (dir.path() / "orbit.ini").string(), "--out", dir.path().string()}).code == 0);
  std::istringstream csv(slurp(dir.path() / "orbit.csv"));
  std::string line;
  double drift = -1.0;
  std::vector<std::vector<double>> rows;
  bool header = false;
  while (std::getline(csv, line)) {
    if (line.rfind("# jacobi_drift=", 0) == 0) drift = std::stod(line.substr(15));
    if (line == "t,x,y,vx,vy,C") {
      header = true;
      continue;
    }
    if (!header) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  REQUIRE(header);
  REQUIRE(rows.size() == 21);
  CHECK(drift >= 0.0);
  CHECK(drift < 1e-9);
  for (const auto& row : rows) {
    CHECK(row[1] == doctest::Approx(0.49).epsilon(1e-9));
    CHECK(row[2] == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-9));
  }
}

TEST_CASE("normal form residuals are serialized") {
  ScratchDir dir("nf");
  REQUIRE(invoke({"normalform", "--mu", "0.01", "--out", dir.path().string()}).code == 0);
  const json doc = read_json(dir.path() / "normalform.json");
  CHECK(doc["residuals"]["canonical"].get<double>() < 1e-9);
  CHECK(doc["residuals"]["diagonal"].get<double>() < 1e-9);
  CHECK(doc["J"].size() == 4);
  CHECK(doc["printed_scalars"].contains("h_printed"));
  CHECK(doc["parameters"]["n"].get<double>() == 1.0);
}

TEST_CASE("csv format flattens documents") {
  ScratchDir dir("csv");
  REQUIRE(invoke({"equilibria", "--mu", "0.025", "--format", "csv", "--out", dir.path().string()}).code == 0);
  const std::string csv = slurp(dir.path() / "equilibria.csv");
  CHECK(csv.rfind("key,value\n", 0) == 0);
  CHECK(csv.find("parameters.mu,0.025") != std::string::npos);
}

TEST_CASE("level tokens") {
  const auto p = chermnykh::build_system(chermnykh::testing::classical(0.025));
  CHECK(chermnykh::app::resolve_level("L4", p) == doctest::Approx(2.975625).epsilon(1e-13));
  CHECK(chermnykh::app::resolve_level("L4+1e-3", p) == doctest::Approx(2.976625).epsilon(1e-13));
  CHECK(chermnykh::app::resolve_level("3.25", p) == 3.25);
  CHECK_THROWS_AS(chermnykh::app::resolve_level("L9", p), chermnykh::app::ConfigError);
}
