#include "projunif/projdist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "projunif/specfun.hpp"

namespace projunif {

namespace {

void check_dim(int q) {
  if (q < 1) throw std::domain_error("dimension q must be >= 1");
}

}  // namespace

double proj_log_norm(int q) {
  check_dim(q);
  return log_beta(0.5, 0.5 * q);
}

double proj_density(int q, double t) {
  check_dim(q);
  if (!(std::abs(t) <= 1.0)) throw std::domain_error("proj_density: |t| > 1");
  if (q == 2) return 0.5;
  if (std::abs(t) == 1.0) {
    return q == 1 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return std::exp((0.5 * q - 1.0) * std::log1p(-t * t) - proj_log_norm(q));
}

double proj_cdf(int q, double x) {
  check_dim(q);
  if (std::isnan(x)) throw std::domain_error("proj_cdf: NaN argument");
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (q == 1) return 1.0 - std::acos(x) / kPi;
  if (q == 2) return 0.5 * (x + 1.0);
  if (x >= 0.0) return 0.5 * (1.0 + reg_inc_beta(x * x, 0.5, 0.5 * q));
  // Lower tail through the complementary form keeps relative accuracy near -1.
  return 0.5 * reg_inc_beta((1.0 - x) * (1.0 + x), 0.5 * q, 0.5);
}

double proj_quantile(int q, double p) {
  check_dim(q);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("proj_quantile: p outside [0, 1]");
  }
  if (p == 0.0) return -1.0;
  if (p == 1.0) return 1.0;
  if (p == 0.5) return 0.0;
  if (q == 1) return -std::cos(kPi * p);
  if (q == 2) return 2.0 * p - 1.0;
  // F_q(x) = (1 + sign(x) I_{x^2}(1/2, q/2)) / 2
  const double tail = std::abs(2.0 * p - 1.0);
  const double x = std::sqrt(reg_inc_beta_inv(tail, 0.5, 0.5 * q));
  return p > 0.5 ? x : -x;
}

}  // namespace projunif
