#include "projunif/ingest.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace projunif {

namespace {

// Fields split on any mix of commas, semicolons and whitespace.
std::vector<std::string> tokens(std::string line) {
  for (char& c : line)
    if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string f; is >> f;) out.push_back(f);
  return out;
}

bool to_double(const std::string& s, double& v) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(v);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int expected_columns(InputFormat f) {
  switch (f) {
    case InputFormat::Circular: return 1;
    case InputFormat::Orbital:
    case InputFormat::LatLon: return 2;
    case InputFormat::Cartesian: return 0;
  }
  return 0;
}

std::string line_list(const std::vector<int>& lines) {
  std::string s;
  std::size_t shown = std::min<std::size_t>(lines.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) s += ", ";
    s += std::to_string(lines[i]);
  }
  if (lines.size() > shown) s += ", ... (" + std::to_string(lines.size()) + " in total)";
  return s;
}

}  // namespace

InputFormat parse_format(const std::string& name) {
  if (name == "cartesian") return InputFormat::Cartesian;
  if (name == "circular") return InputFormat::Circular;
  if (name == "orbital") return InputFormat::Orbital;
  if (name == "latlon") return InputFormat::LatLon;
  throw std::invalid_argument("unknown input format '" + name +
                              "' (cartesian, circular, orbital, latlon)");
}

const char* format_name(InputFormat f) {
  switch (f) {
    case InputFormat::Cartesian: return "cartesian";
    case InputFormat::Circular: return "circular";
    case InputFormat::Orbital: return "orbital";
    case InputFormat::LatLon: return "latlon";
  }
  return "?";
}

std::vector<double> orbit_normal(double inclination, double node) {
  double si = std::sin(inclination);
  return {si * std::sin(node), -si * std::cos(node), std::cos(inclination)};
}

std::vector<double> latlon_point(double lat_deg, double lon_deg) {
  constexpr double deg = std::numbers::pi / 180.0;
  double la = lat_deg * deg, lo = lon_deg * deg;
  return {std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la)};
}

Ingested ingest(std::istream& in, const IngestOptions& options, const std::string& source) {
  Ingested out;
  out.source = source;
  int columns = expected_columns(options.format);
  std::vector<double> coords;
  std::vector<int> bad;
  std::string line;
  int lineno = 0;
  bool skipped_header = !options.header;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    ++out.rows;
    auto f = tokens(t);
    if (columns == 0) {
      if (f.size() < 2) {
        bad.push_back(lineno);
        continue;
      }
      columns = static_cast<int>(f.size());
    }
    std::vector<double> v(f.size());
    bool ok = static_cast<int>(f.size()) == columns;
    for (std::size_t j = 0; ok && j < f.size(); ++j) ok = to_double(f[j], v[j]);
    if (!ok) {
      bad.push_back(lineno);
      continue;
    }
    std::vector<double> p;
    switch (options.format) {
      case InputFormat::Cartesian: {
        double s = 0;
        for (double c : v) s += c * c;
        double r = std::sqrt(s);
        if (!(r > 0) || !std::isfinite(r)) {
          bad.push_back(lineno);
          continue;
        }
        if (std::abs(s - 1.0) > 4 * std::numeric_limits<double>::epsilon())
          for (double& c : v) c /= r;
        p = std::move(v);
        break;
      }
      case InputFormat::Circular: p = {std::cos(v[0]), std::sin(v[0])}; break;
      case InputFormat::Orbital: p = orbit_normal(v[0], v[1]); break;
      case InputFormat::LatLon:
        if (std::abs(v[0]) > 90.0) {
          bad.push_back(lineno);
          continue;
        }
        p = latlon_point(v[0], v[1]);
        break;
    }
    coords.insert(coords.end(), p.begin(), p.end());
  }
  if (!bad.empty() && !options.drop_invalid)
    throw std::invalid_argument(source + ": malformed rows at line(s) " + line_list(bad));
  out.dropped_lines = std::move(bad);
  if (coords.empty()) throw std::invalid_argument(source + ": no data rows");
  int q = options.format == InputFormat::Cartesian ? columns - 1
          : options.format == InputFormat::Circular ? 1
                                                    : 2;
  out.sample = UnitSample(q, std::move(coords));
  return out;
}

Ingested ingest(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open");
  return ingest(in, options, path);
}

void write_sample_csv(std::ostream& out, const UnitSample& sample) {
  char buf[32];
  for (int i = 0; i < sample.n(); ++i) {
    const double* r = sample.row(i);
    for (int j = 0; j < sample.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", r[j]);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace projunif
