#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "projunif/ingest.hpp"
#include "projunif/sampling.hpp"
#include "projunif/specfun.hpp"
#include "projunif/statistics.hpp"

using namespace projunif;
using doctest::Approx;

namespace {

Ingested read(const std::string& text, InputFormat f, bool header = false, bool drop = false) {
  std::istringstream in(text);
  IngestOptions opt;
  opt.format = f;
  opt.header = header;
  opt.drop_invalid = drop;
  return ingest(in, opt);
}

std::string error_of(const std::string& text, InputFormat f) {
  try {
    read(text, f);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("orbital row i = pi/2, node 0 maps to (0, -1, 0)") {
  const auto r = read("1.5707963267948966,0\n", InputFormat::Orbital);
  REQUIRE(r.sample.q == 2);
  REQUIRE(r.sample.n() == 1);
  CHECK(std::abs(r.sample.row(0)[0]) < 1e-15);
  CHECK(r.sample.row(0)[1] == Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(r.sample.row(0)[2]) < 1e-15);
}

TEST_CASE("circular row pi/3 maps to (1/2, sqrt(3)/2)") {
  const auto r = read("1.0471975511965976\n", InputFormat::Circular);
  REQUIRE(r.sample.q == 1);
  CHECK(r.sample.row(0)[0] == Approx(0.5).epsilon(1e-15));
  CHECK(r.sample.row(0)[1] == Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
}

TEST_CASE("latlon north pole ignores longitude") {
  for (const char* line : {"90,0\n", "90,123.4\n", "90;-45\n"}) {
    const auto r = read(line, InputFormat::LatLon);
    REQUIRE(r.sample.q == 2);
    CHECK(std::abs(r.sample.row(0)[0]) < 1e-15);
    CHECK(std::abs(r.sample.row(0)[1]) < 1e-15);
    CHECK(r.sample.row(0)[2] == Approx(1.0).epsilon(1e-15));
  }
  const auto p = latlon_point(0, 90);
  CHECK(std::abs(p[0]) < 1e-15);
  CHECK(p[1] == Approx(1.0));
}

TEST_CASE("cartesian rows are normalized and q follows the column count") {
  const auto r = read("3 4\n0\t-2\n", InputFormat::Cartesian);
  REQUIRE(r.sample.q == 1);
  CHECK(r.sample.row(0)[0] == Approx(0.6));
  CHECK(r.sample.row(0)[1] == Approx(0.8));
  CHECK(r.sample.row(1)[1] == Approx(-1.0));
  const auto r4 = read("1,2,3,4,5\n-1,0,0,0,0\n", InputFormat::Cartesian);
  CHECK(r4.sample.q == 4);
  for (int i = 0; i < r4.sample.n(); ++i) {
    double s = 0;
    for (int j = 0; j < 5; ++j) s += r4.sample.row(i)[j] * r4.sample.row(i)[j];
    CHECK(std::abs(s - 1) < 1e-10);
  }
}

TEST_CASE("header, comments and blank lines") {
  const auto r = read("# comment\nx,y,z\n\n1,0,0\n# more\n0,1,0\n", InputFormat::Cartesian, true);
  CHECK(r.sample.n() == 2);
  CHECK(r.rows == 2);
  CHECK(r.dropped_lines.empty());
  CHECK(error_of("x,y,z\n1,0,0\n", InputFormat::Cartesian).find("line") != std::string::npos);
}

TEST_CASE("malformed rows are reported with line numbers") {
  const std::string text = "1,0,0\n0,0,0\n0,1,0\nabc,1,0\n1,1\n";
  const auto msg = error_of(text, InputFormat::Cartesian);
  CHECK(msg.find("malformed") != std::string::npos);
  CHECK(msg.find("2") != std::string::npos);
  CHECK(msg.find("4") != std::string::npos);
  CHECK(msg.find("5") != std::string::npos);

  const auto r = read(text, InputFormat::Cartesian, false, true);
  CHECK(r.sample.n() == 2);
  CHECK(r.rows == 5);
  REQUIRE(r.dropped_lines.size() == 3);
  CHECK(r.dropped_lines[0] == 2);
  CHECK(r.dropped_lines[1] == 4);
  CHECK(r.dropped_lines[2] == 5);

  CHECK(error_of("95,10\n", InputFormat::LatLon).find("1") != std::string::npos);
  CHECK(error_of("nan\n", InputFormat::Circular).find("malformed") != std::string::npos);
}

TEST_CASE("empty input is an error") {
  CHECK(error_of("", InputFormat::Cartesian).find("no data rows") != std::string::npos);
  CHECK(error_of("# only a comment\n\n", InputFormat::Circular).find("no data rows") !=
        std::string::npos);
  IngestOptions opt;
  CHECK_THROWS_AS(ingest(std::string("/nonexistent/file.csv"), opt), std::invalid_argument);
}

TEST_CASE("format names round-trip") {
  for (auto f : {InputFormat::Cartesian, InputFormat::Circular, InputFormat::Orbital,
                 InputFormat::LatLon})
    CHECK(parse_format(format_name(f)) == f);
  CHECK_THROWS_AS(parse_format("polar"), std::invalid_argument);
}

TEST_CASE("written samples re-ingest to identical statistics") {
  for (int q : {1, 2, 5}) {
    RngStream rng(5, q);
    const auto s = sample_uniform(60, q, rng);
    std::stringstream buf;
    write_sample_csv(buf, s);
    const auto r = read(buf.str(), InputFormat::Cartesian);
    REQUIRE(r.sample.q == q);
    REQUIRE(r.sample.n() == 60);
    for (const char* t : {"cvm", "ad", "rt", "rayleigh", "bingham", "gine"}) {
      const auto spec = parse_test(t);
      const double a = statistic(spec, s);
      const double b = statistic(spec, r.sample);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}
