#pragma once

#include <functional>
#include <string>

namespace projunif {

enum class WeightKind { CvM, AD, Rothman, Dirac, Density };

/// The measure W on [0, 1] selecting a projected-ecdf statistic.
///
/// Rothman(t) places mass 1/2 at t_m and 1 - t_m. Dirac(u) is a single atom;
/// statistics built from it coincide with those of its mirrored counterpart,
/// so kernels symmetrize it internally. Density carries a user cdf W.
struct WeightSpec {
  WeightKind kind = WeightKind::CvM;
  double param = 0.0;
  std::function<double(double)> cdf;
  std::string label;

  static WeightSpec cvm();
  static WeightSpec ad();
  static WeightSpec rothman(double t);
  static WeightSpec dirac(double u);
  static WeightSpec density(std::function<double(double)> cdf, std::string label);

  /// min(t, 1 - t) for Rothman and Dirac atoms.
  double t_m() const;

  /// Stable identifier used in reports and cache keys.
  std::string id() const;

  /// Small integer tag stored in coefficient cache files.
  int code() const;

  /// W(u) for the finite (probability) weights; throws for AD.
  double eval(double u) const;
};

/// Parses "cvm", "ad", "rt", "rt:0.25", "rt:1/3", "dirac:0.3".
WeightSpec parse_weight(const std::string& text);

/// Decimal or "a/b".
double parse_number(const std::string& text);

}  // namespace projunif
