#pragma once

// Reading samples from delimited text files.

#include <istream>
#include <string>
#include <vector>

#include "projunif/sample.hpp"

namespace projunif {

enum class InputFormat {
  Cartesian,  // q + 1 columns, normalized on load
  Circular,   // one angle column, radians
  Orbital,    // inclination i and node longitude Omega, radians
  LatLon      // latitude and longitude, degrees
};

InputFormat parse_format(const std::string& name);
const char* format_name(InputFormat f);

struct IngestOptions {
  InputFormat format = InputFormat::Cartesian;
  bool header = false;        // skip the first non-comment line
  bool drop_invalid = false;  // drop bad rows instead of failing
};

struct Ingested {
  UnitSample sample;
  std::string source;
  int rows = 0;                    // data rows read, kept or not
  std::vector<int> dropped_lines;  // 1-based line numbers
};

/// Fields may be separated by commas, semicolons, tabs or spaces. Blank lines
/// and lines starting with '#' are skipped. Malformed rows raise
/// std::invalid_argument listing their line numbers unless drop_invalid.
Ingested ingest(std::istream& in, const IngestOptions& options, const std::string& source = "<stream>");
Ingested ingest(const std::string& path, const IngestOptions& options);

/// Unit vector of the orbit normal, (sin i sin W, -sin i cos W, cos i).
std::vector<double> orbit_normal(double inclination, double node);
/// (cos lat cos lon, cos lat sin lon, sin lat), degrees in.
std::vector<double> latlon_point(double lat_deg, double lon_deg);

/// Writes rows as CSV with 17 significant digits.
void write_sample_csv(std::ostream& out, const UnitSample& sample);

}  // namespace projunif
