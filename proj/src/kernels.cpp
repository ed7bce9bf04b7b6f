#include "projunif/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "projunif/projdist.hpp"
#include "projunif/specfun.hpp"

namespace projunif {

namespace {

void check_angle(double theta) {
  if (!(theta >= 0.0 && theta <= kPi + 1e-12)) {
    throw std::domain_error("kernel angle outside [0, pi]");
  }
}

// int_0^{x_hi} g(t, F_{q-1}(y(t))) dF_q(t) with y(t) = t tan(theta/2) / sqrt(1 - t^2)
// and 0 <= x_hi <= cos(theta/2). Written in t = cos(phi) with
// phi = phi_lo + (pi/2 - phi_lo) s^2 so the square-root behaviour of F_{q-1}
// at y = 1 becomes smooth in s.
template <class G>
double cap_integral(int q, double theta, double x_hi, int nodes, G&& g) {
  if (x_hi <= 0.0) return 0.0;
  const auto rule = gauss_legendre(nodes);
  const double phi_lo = std::acos(std::min(x_hi, 1.0));
  const double span = 0.5 * kPi - phi_lo;
  const double half_tan = std::tan(0.5 * theta);
  const double log_norm = proj_log_norm(q);
  double acc = 0.0;
  for (int i = 0; i < rule->order(); ++i) {
    const double s = 0.5 * (1.0 + rule->nodes[i]);
    const double phi = phi_lo + span * s * s;
    const double t = std::cos(phi);
    const double sin_phi = std::sin(phi);
    const double y = std::min(1.0, half_tan * t / sin_phi);
    const double dens = std::exp((q - 1) * std::log(sin_phi) - log_norm);
    acc += rule->weights[i] * g(t, proj_cdf(q - 1, y)) * dens * 2.0 * span * s;
  }
  return 0.5 * acc;
}

// u - sin(u), accurate for small u.
double u_minus_sin(double u) {
  if (std::abs(u) > 0.5) return u - std::sin(u);
  const double u2 = u * u;
  double term = u * u2 / 6.0;
  double sum = term;
  for (int k = 2; k < 12; ++k) {
    term *= -u2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
  }
  return sum;
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double symmetrized(const WeightSpec& w, double u) {
  if (w.kind == WeightKind::CvM) return u;
  return 0.5 * (w.eval(u) + 1.0 - w.eval(1.0 - u));
}

double atom_of(const WeightSpec& w) {
  return w.kind == WeightKind::Rothman ? w.t_m()
                                       : std::min(w.param, 1.0 - w.param);
}

double psi_ad_q2(double theta, int nodes) {
  const double c = std::cos(0.5 * theta);
  const double half_tan = std::tan(0.5 * theta);
  const auto rule = gauss_legendre(nodes);
  double acc = 0.0;
  for (int i = 0; i < rule->order(); ++i) {
    const double s = 0.5 * (1.0 + rule->nodes[i]);
    const double t = c * (1.0 - s * s);
    const double y = std::min(1.0, t * half_tan / std::sqrt(1.0 - t * t));
    acc += rule->weights[i] * (std::log1p(t) - std::log1p(-t)) * std::acos(y) *
           2.0 * c * s;
  }
  return -std::log(4.0) + (2.0 / kPi) * 0.5 * acc;
}

double psi_ad_q3(double theta, int nodes) {
  const double s_theta = u_minus_sin(theta);
  double value = -2.0 * std::log(2.0 * kPi) +
                 (xlogx(s_theta) + xlogx(2.0 * kPi - s_theta)) / kPi;
  if (theta >= kPi) return value;
  const double c = std::cos(0.5 * theta);
  const auto rule = gauss_legendre(nodes);
  double acc = 0.0;
  for (int i = 0; i < rule->order(); ++i) {
    const double s = 0.5 * (1.0 + rule->nodes[i]);
    const double t = c * (1.0 - s * s);
    // acos(t) - t sqrt(1 - t^2) = (u - sin u) / 2 with u = 2 acos(t)
    const double g = 0.5 * u_minus_sin(2.0 * std::acos(t));
    acc += rule->weights[i] * t * std::log((kPi - g) / g) * 2.0 * c * s;
  }
  value -= (4.0 / kPi) * std::tan(0.5 * theta) * 0.5 * acc;
  return value;
}

}  // namespace

double cap_intersection(int q, double theta, double x, int nodes) {
  check_angle(theta);
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("cap_intersection: |x| > 1");
  const double ax = std::abs(x);
  double a_pos;
  if (q == 1) {
    a_pos = 2.0 * proj_cdf(1, ax) - 1.0 +
            std::max(0.0, std::acos(ax) - 0.5 * theta) / kPi;
  } else if (std::cos(0.5 * theta) <= ax) {
    a_pos = 2.0 * proj_cdf(q, ax) - 1.0;
  } else {
    a_pos = 0.5 - theta / (2.0 * kPi) +
            2.0 * cap_integral(q, theta, ax, nodes,
                               [](double, double f) { return f; });
  }
  if (x >= 0.0) return a_pos;
  return a_pos + 1.0 - 2.0 * proj_cdf(q, ax);
}

double psi_generic(int q, double theta, const WeightSpec& weight, int nodes) {
  check_angle(theta);
  switch (weight.kind) {
    case WeightKind::AD:
      return q == 1 ? psi_ad(1, theta) : psi_ad_integral(q, theta, nodes);
    case WeightKind::Rothman:
    case WeightKind::Dirac: {
      const double u = atom_of(weight);
      const double x = proj_quantile(q, 1.0 - u);
      return cap_intersection(q, theta, x, nodes) - 0.5 + u;
    }
    case WeightKind::CvM:
    case WeightKind::Density:
      break;
  }
  auto w = [&](double u) { return symmetrized(weight, u); };
  if (q == 1) {
    const double a = theta / (2.0 * kPi);
    const double area = weight.kind == WeightKind::CvM
                            ? 0.5 * a * a
                            : integrate_adaptive(w, 0.0, a, 1e-13, 1e-12);
    return 0.5 - a + 2.0 * area;
  }
  const double half_area = weight.kind == WeightKind::CvM
                               ? 0.125
                               : integrate_adaptive(w, 0.0, 0.5, 1e-13, 1e-12);
  const double c = std::cos(0.5 * theta);
  const double tail = cap_integral(q, theta, c, nodes, [&](double t, double f) {
    return w(proj_cdf(q, t)) * (1.0 - f);
  });
  return -0.5 + theta / (2.0 * kPi) + 2.0 * half_area + 4.0 * tail;
}

double psi_cvm(int q, double theta) {
  check_angle(theta);
  const double a = theta / (2.0 * kPi);
  switch (q) {
    case 1:
      return 0.5 + a * (a - 1.0);
    case 2:
      return 0.5 - 0.25 * std::sin(0.5 * theta);
    case 3: {
      // (pi - theta) tan(theta/2) = eps / tan(eps/2), eps = pi - theta
      const double eps = kPi - theta;
      const double ratio = eps < 1e-8 ? 2.0 - eps * eps / 6.0 : eps / std::tan(0.5 * eps);
      const double s = std::sin(0.5 * theta);
      return 0.5 + a * (a - 1.0) + (ratio - 2.0 * s * s) / (4.0 * kPi * kPi);
    }
    default:
      return psi_cvm_integral(q, theta);
  }
}

double psi_cvm_integral(int q, double theta, int nodes) {
  check_angle(theta);
  if (q < 2) throw std::domain_error("psi_cvm_integral: q must be >= 2");
  const double c = std::cos(0.5 * theta);
  const double fc = proj_cdf(q, c);
  const double tail = cap_integral(q, theta, c, nodes, [&](double t, double f) {
    return proj_cdf(q, t) * f;
  });
  return -0.75 + theta / (2.0 * kPi) + 2.0 * fc * fc - 4.0 * tail;
}

double rothman_threshold(int q, double t) {
  const double tm = std::min(t, 1.0 - t);
  if (q == 1) return 2.0 * kPi * tm;
  return 2.0 * std::acos(proj_quantile(q, 1.0 - tm));
}

double psi_rothman(int q, double theta, double t) {
  check_angle(theta);
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("Rothman t must lie in (0, 1)");
  const double tm = std::min(t, 1.0 - t);
  if (q == 1) {
    const double h = std::max(0.0, tm - theta / (2.0 * kPi)) - tm * tm;
    return h + 0.5 - tm * (1.0 - tm);
  }
  if (q > 3) return psi_rothman_integral(q, theta, t);
  const double threshold = rothman_threshold(q, t);
  if (theta >= threshold) return 0.5 - tm;
  const double half = 0.5 * theta;
  if (q == 2) {
    const double arg = (0.5 - tm) * std::tan(half) / std::sqrt(tm * (1.0 - tm));
    const double c = std::cos(half);
    const double d = 1.0 - 2.0 * tm;
    return -tm + 0.5 - d / kPi * std::acos(std::min(1.0, arg)) +
           std::atan2(std::sqrt(std::max(0.0, c * c - d * d)), std::sin(half)) / kPi;
  }
  const double ch = std::cos(0.5 * threshold);
  return 0.5 + tm - (theta + threshold) / (2.0 * kPi) +
         (0.5 * std::sin(threshold) + std::tan(half) * ch * ch) / kPi;
}

double psi_rothman_integral(int q, double theta, double t, int nodes) {
  check_angle(theta);
  if (q < 2) throw std::domain_error("psi_rothman_integral: q must be >= 2");
  const double tm = std::min(t, 1.0 - t);
  const double xt = proj_quantile(q, 1.0 - tm);
  if (std::cos(0.5 * theta) <= xt) return 0.5 - tm;
  return tm - theta / (2.0 * kPi) +
         2.0 * cap_integral(q, theta, xt, nodes, [](double, double f) { return f; });
}

double psi_ad(int q, double theta) {
  check_angle(theta);
  if (theta == 0.0) return 0.0;
  switch (q) {
    case 1:
      return -2.0 * std::log(2.0 * kPi) +
             (xlogx(theta) + xlogx(2.0 * kPi - theta)) / kPi;
    case 2:
      return psi_ad_q2(theta, kKernelNodes);
    case 3:
      return psi_ad_q3(theta, kKernelNodes);
    default:
      return psi_ad_integral(q, theta);
  }
}

double psi_ad_integral(int q, double theta, int nodes) {
  check_angle(theta);
  if (q < 2) throw std::domain_error("psi_ad_integral: q must be >= 2");
  if (theta == 0.0) return 0.0;
  const double c = std::cos(0.5 * theta);
  const double tail = cap_integral(q, theta, c, nodes, [&](double t, double f) {
    return (std::log(proj_cdf(q, t)) - std::log(proj_cdf(q, -t))) * (1.0 - f);
  });
  return -std::log(4.0) + 4.0 * tail;
}

double psi(int q, double theta, const WeightSpec& weight) {
  switch (weight.kind) {
    case WeightKind::CvM:
      return psi_cvm(q, theta);
    case WeightKind::AD:
      return psi_ad(q, theta);
    case WeightKind::Rothman:
      return psi_rothman(q, theta, weight.param);
    case WeightKind::Dirac:
    case WeightKind::Density:
      return psi_generic(q, theta, weight);
  }
  throw std::invalid_argument("unknown weight");
}

double weight_second_moment(const WeightSpec& weight) {
  switch (weight.kind) {
    case WeightKind::CvM:
      return 1.0 / 3.0;
    case WeightKind::Rothman:
    case WeightKind::Dirac: {
      const double u = atom_of(weight);
      return 0.5 * (u * u + (1.0 - u) * (1.0 - u));
    }
    case WeightKind::Density:
      // int u^2 dW~ = 1/2 + int (1 - 2u) W(u) du for the mirrored average W~
      return 0.5 + integrate_adaptive(
                       [&](double u) { return (1.0 - 2.0 * u) * weight.eval(u); },
                       0.0, 1.0, 1e-13, 1e-12);
    case WeightKind::AD:
      break;
  }
  throw std::invalid_argument("the Anderson-Darling weight has no finite moments");
}

KernelTable::KernelTable(int q, const WeightSpec& weight, int intervals)
    : q_(q), end_(kPi), inv_h_(0.0), tail_(0.0), last_(intervals - 2) {
  if (intervals < 4) throw std::invalid_argument("KernelTable: too few intervals");
  if (weight.kind == WeightKind::Rothman || weight.kind == WeightKind::Dirac) {
    end_ = rothman_threshold(q, atom_of(weight));
    tail_ = 0.5 - atom_of(weight);
    if (end_ <= 0.0) return;
  }
  inv_h_ = intervals / end_;
  values_.resize(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    values_[i] = psi(q, std::min(end_, i / inv_h_), weight);
  }
  if (weight.kind != WeightKind::Rothman && weight.kind != WeightKind::Dirac) {
    tail_ = values_.back();
  }
}

}  // namespace projunif
