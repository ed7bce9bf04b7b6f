#include "projunif/sample.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "projunif/specfun.hpp"

namespace projunif {

UnitSample::UnitSample(int q_, std::vector<double> coords) : q(q_), x(std::move(coords)) {
  if (q < 1) throw std::invalid_argument("dimension q must be >= 1");
  if (x.size() % (q + 1) != 0) {
    throw std::invalid_argument("coordinate count is not a multiple of q + 1");
  }
}

void UnitSample::normalize() {
  const int d = dim();
  for (int i = 0; i < n(); ++i) {
    double* r = row(i);
    double ss = 0.0;
    for (int j = 0; j < d; ++j) ss += r[j] * r[j];
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + " has zero or invalid norm");
    }
    if (std::abs(ss - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) continue;
    for (int j = 0; j < d; ++j) r[j] /= norm;
  }
}

UnitSample UnitSample::from_angles(const std::vector<double>& angles) {
  std::vector<double> coords;
  coords.reserve(2 * angles.size());
  for (double a : angles) {
    coords.push_back(std::cos(a));
    coords.push_back(std::sin(a));
  }
  return UnitSample(1, std::move(coords));
}

std::vector<double> UnitSample::angles() const {
  if (q != 1) throw std::invalid_argument("angles() needs circular data (q = 1)");
  std::vector<double> out(n());
  for (int i = 0; i < n(); ++i) {
    double a = std::atan2(row(i)[1], row(i)[0]);
    if (a < 0.0) a += 2.0 * kPi;
    out[i] = a;
  }
  return out;
}

}  // namespace projunif
