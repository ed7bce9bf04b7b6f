#pragma once

// Points on the unit sphere of R^{q+1}, stored row-major.

#include <vector>

namespace projunif {

struct UnitSample {
  int q = 1;
  std::vector<double> x;  // n * (q + 1)

  UnitSample() = default;
  UnitSample(int q_, std::vector<double> coords);

  int dim() const { return q + 1; }
  int n() const { return static_cast<int>(x.size()) / (q + 1); }
  const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * (q + 1); }
  double* row(int i) { return x.data() + static_cast<std::size_t>(i) * (q + 1); }

  /// Rescales every row to unit norm, leaving rows already within 4 ulp of it
  /// untouched; throws std::invalid_argument naming the
  /// first zero or non-finite row.
  void normalize();

  /// (cos a, sin a) for each angle.
  static UnitSample from_angles(const std::vector<double>& angles);
  /// atan2 angles in [0, 2 pi); q must be 1.
  std::vector<double> angles() const;
};

}  // namespace projunif
