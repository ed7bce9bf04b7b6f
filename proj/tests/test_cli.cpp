#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "projunif/ingest.hpp"
#include "projunif/sampling.hpp"
#include "projunif/statistics.hpp"

using namespace projunif;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string tmp_path(const std::string& name) {
  std::filesystem::create_directories(PROJUNIF_TEST_TMP);
  return std::string(PROJUNIF_TEST_TMP) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const std::string err = tmp_path("stderr.txt");
  const std::string cmd = std::string("\"") + PROJUNIF_CLI_PATH + "\" " + args + " 2>\"" + err + "\"";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

double pvalue_of(const json& report, const std::string& test) {
  for (const auto& r : report["results"])
    if (r["test"].get<std::string>().rfind(test, 0) == 0) return r["p_value"].get<double>();
  FAIL("test missing from report: " << test);
  return -1;
}

}  // namespace

TEST_CASE("asymptotic critical value of CvM on the circle") {
  const auto r = run("cv --test cvm --q 1 --asymptotic --alpha 0.05 --output json");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const double cv = j[0]["critical_value"].get<double>();
  CHECK(std::abs(cv - 0.3738) <= 5e-4);
}

TEST_CASE("single observation with asymptotic p-values is rejected") {
  const auto path = tmp_path("one.csv");
  write_file(path, "0.6,0.8\n");
  const auto r = run("test \"" + path + "\"");
  CHECK(r.code == 2);
  CHECK(r.err.find("sample too small for asymptotic calibration") != std::string::npos);
}

TEST_CASE("a single cluster has vanishing p-values") {
  const auto path = tmp_path("cluster.csv");
  std::ostringstream os;
  for (int i = 0; i < 50; ++i) os << "0.3,0.4,0.5\n";
  write_file(path, os.str());
  const auto r = run("test \"" + path + "\" -t cvm,ad,rt");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["n"] == 50);
  CHECK(j["q"] == 2);
  for (const char* t : {"cvm", "ad", "rt"}) CHECK(pvalue_of(j, t) < 1e-4);
}

TEST_CASE("uniform samples from the sample command pass the test command") {
  int passing = 0;
  const auto path = tmp_path("null.csv");
  for (int seed = 1; seed <= 100; ++seed) {
    const auto s = run("sample --alt vmf --eta 0 --n 200 --q 2 --seed " + std::to_string(seed) +
                       " --out \"" + path + "\"");
    REQUIRE(s.code == 0);
    const auto r = run("test \"" + path + "\" -t cvm,ad,rt");
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    bool all = true;
    for (const char* t : {"cvm", "ad", "rt"}) all = all && pvalue_of(j, t) > 0.01;
    passing += all;
  }
  CHECK(passing >= 95);
}

TEST_CASE("sampled files re-ingest to the in-memory statistics") {
  const auto path = tmp_path("roundtrip.csv");
  const auto s = run("sample --alt vmf --kappa 0.5 --n 80 --q 3 --seed 11 --out \"" + path + "\"");
  REQUIRE(s.code == 0);
  RngStream rng(11, 0);
  const auto mem = sample_alternative(AlternativeSpec::preset("vmf", 0.5), 80, 3, rng);
  const auto r = run("test \"" + path + "\" -t cvm,ad,rt,rayleigh --pvalue none");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  for (const auto& row : j["results"]) {
    const double direct = statistic(parse_test(row["test"].get<std::string>()), mem);
    CHECK(std::abs(row["statistic"].get<double>() - direct) <= 1e-12 * std::max(1.0, direct));
  }
}

TEST_CASE("seeded commands rerun bit-exactly") {
  const auto a = run("sample --alt wat --kappa 1 --n 30 --q 2 --seed 7");
  const auto b = run("sample --alt wat --kappa 1 --n 30 --q 2 --seed 7");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = run("cv --test cvm,ad --q 2 --n 20 --M 2000 --seed 3 --output csv");
  const auto d = run("cv --test cvm,ad --q 2 --n 20 --M 2000 --seed 3 --output csv --workers 1");
  CHECK(c.code == 0);
  CHECK(c.out == d.out);
}

TEST_CASE("incompatible tests are listed and the others still run") {
  const auto path = tmp_path("sphere.csv");
  run("sample --alt vmf --eta 0 --n 40 --q 2 --seed 5 --out \"" + path + "\"");
  const auto r = run("test \"" + path + "\" -t cvm,watson,ilrt");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["results"].size() == 1);
  CHECK(j["incompatible"].size() == 2);
}

TEST_CASE("input errors exit with code 2") {
  const auto bad = tmp_path("bad.csv");
  write_file(bad, "1,0,0\n0,0,0\n0,1,0\nx,1,0\n");
  const auto r = run("test \"" + bad + "\"");
  CHECK(r.code == 2);
  CHECK(r.err.find("2") != std::string::npos);
  CHECK(r.err.find("4") != std::string::npos);
  const auto dropped = run("test \"" + bad + "\" --drop-invalid --pvalue none");
  CHECK(dropped.code == 0);
  CHECK(json::parse(dropped.out)["input"]["dropped_lines"] == json::array({2, 4}));

  const auto empty = tmp_path("empty.csv");
  write_file(empty, "");
  CHECK(run("test \"" + empty + "\"").code == 2);
  CHECK(run("test /nonexistent/file.csv").code == 2);
  CHECK(run("cv --test nosuch --q 1 --asymptotic").code == 2);
  CHECK(run("cv --test cvm --q 1").code == 2);
  CHECK(run("sample --alt vmf --kappa 1 --n 10").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("power command with a small config") {
  const auto cfg = tmp_path("power.json");
  write_file(cfg, R"({"q": 1, "n": 30, "M": 200, "M_null": 500, "seed": 4,
                      "tests": ["rayleigh", "cvm"], "dgps": [{"name": "vmf", "kappa": 1.0}, "uniform"]})");
  const auto json_out = tmp_path("power_out.json");
  const auto r = run("power --config \"" + cfg + "\" --json \"" + json_out + "\"");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Rayleigh") != std::string::npos);
  const auto j = json::parse(slurp(json_out));
  CHECK(j.dump().find("rate") != std::string::npos);
}
