#include "projunif/chi2mix.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "projunif/specfun.hpp"

namespace projunif {

namespace {

constexpr int kSeriesTerms = 12;
constexpr double kSeriesRadius = 0.2;

// Terms with w*u <= kSeriesRadius on the whole range enter through power sums
// of their weights; the rest are evaluated directly.
class ImhofIntegrand {
 public:
  ImhofIntegrand(std::vector<std::pair<double, double>> terms, double x, double U)
      : x_(x) {
    for (const auto& [w, d] : terms) {
      if (w * U > kSeriesRadius) {
        w_.push_back(w);
        d_.push_back(d);
      } else {
        double p = w;
        for (int m = 1; m <= 2 * kSeriesTerms + 1; ++m) {
          power_[m] += d * p;
          p *= w;
        }
      }
    }
  }

  double operator()(double u) const {
    double theta = -0.5 * x_ * u;
    double log_rho = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double z = w_[i] * u;
      theta += 0.5 * d_[i] * std::atan(z);
      log_rho += 0.25 * d_[i] * std::log1p(z * z);
    }
    const double u2 = u * u;
    double up = u;  // u^(2j+1)
    double sign = 1.0;
    for (int j = 0; j < kSeriesTerms; ++j) {
      theta += 0.5 * sign * up * power_[2 * j + 1] / (2 * j + 1);
      up *= u2;
      sign = -sign;
    }
    up = u2;  // u^(2j)
    sign = 1.0;
    for (int j = 1; j <= kSeriesTerms; ++j) {
      log_rho += 0.25 * sign * up * power_[2 * j] / j;
      up *= u2;
      sign = -sign;
    }
    return std::sin(theta) / (u * std::exp(log_rho));
  }

 private:
  double x_;
  std::vector<double> w_, d_;
  double power_[2 * kSeriesTerms + 2] = {};
};

// log of pi * k_S * prod_{S} (w U)^{d/2} over S = {w U > 1}; terms sorted by
// decreasing weight.
double log_tail_bound_inverse(const std::vector<std::pair<double, double>>& terms, double U) {
  double k = 0.0, acc = 0.0;
  for (const auto& [w, d] : terms) {
    if (w * U <= 1.0) break;
    k += 0.5 * d;
    acc += 0.5 * d * std::log(w * U);
  }
  if (k == 0.0) return -INFINITY;
  return std::log(kPi * k) + acc;
}

// Once the phase decreases at rate >= x/4, integration by parts bounds the
// tail beyond U by 8 / (pi x U rho(U)) in probability units.
bool oscillation_cutoff_ok(const std::vector<std::pair<double, double>>& terms, double x,
                           double U, double log_tol) {
  double rate = 0.0, log_rho = 0.0;
  for (const auto& [w, d] : terms) {
    const double z = w * U;
    rate += d * w / (1.0 + z * z);
    log_rho += 0.25 * d * std::log1p(z * z);
  }
  return rate <= 0.5 * x && std::log(8.0 / (kPi * x)) - std::log(U) - log_rho <= log_tol;
}

Cumulants add_term(Cumulants c, double w, double d) {
  c.k1 += w * d;
  c.k2 += 2.0 * w * w * d;
  c.k3 += 8.0 * w * w * w * d;
  return c;
}

double mixture_weight(double b, int k, int q) {
  return q == 1 ? 0.5 * b : b / (1.0 + 2.0 * k / (q - 1));
}

template <class F>
double solve_decreasing(F f, double lo, double hi) {
  // f decreasing, f(lo) > 0 > f(hi) after expansion.
  double flo = f(lo);
  for (int i = 0; i < 200 && flo < 0.0; ++i) {
    lo *= 0.5;
    flo = f(lo);
  }
  double fhi = f(hi);
  for (int i = 0; i < 200 && fhi > 0.0; ++i) {
    hi *= 2.0;
    fhi = f(hi);
  }
  if (flo < 0.0 || fhi > 0.0) throw NumericError("quantile: failed to bracket the root");
  std::uintmax_t iters = 100;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10 * std::abs(a); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

Cumulants mixture_cumulants(const ChiSqMixture& mix) {
  Cumulants c;
  for (std::size_t i = 0; i < mix.size(); ++i) c = add_term(c, mix.w[i], mix.d[i]);
  return c;
}

double hbe_tail(const Cumulants& c, double x) {
  if (!(c.k2 > 0.0) || !(c.k3 > 0.0)) throw NumericError("hbe_tail: degenerate mixture");
  const double nu = 8.0 * c.k2 * c.k2 * c.k2 / (c.k3 * c.k3);
  const double y = nu + (x - c.k1) * std::sqrt(2.0 * nu / c.k2);
  if (y <= 0.0) return 1.0;
  return chisq_upper_tail(y, nu);
}

double hbe_tail(const ChiSqMixture& mix, double x) {
  return hbe_tail(mixture_cumulants(mix), x);
}

double imhof_tail(const ChiSqMixture& mix, double x, double accuracy) {
  if (!(accuracy > 0.0)) throw std::domain_error("imhof_tail: accuracy must be positive");
  if (mix.size() == 0) throw NumericError("imhof_tail: empty mixture");
  if (x <= 0.0) return 1.0;
  std::vector<std::pair<double, double>> terms;
  terms.reserve(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (!(mix.w[i] > 0.0) || !(mix.d[i] > 0.0)) {
      throw std::domain_error("imhof_tail: weights and degrees of freedom must be positive");
    }
    terms.emplace_back(mix.w[i], mix.d[i]);
  }
  std::sort(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.first > b.first; });

  // Truncation point: the tail of the integral beyond U is at most
  // 1 / (pi k_S prod_S (w U)^{d/2}).
  const double target = std::log(1.0 / accuracy);
  double lo = std::log(1.0 / terms.front().first);
  double hi = lo + 1.0;
  while (log_tail_bound_inverse(terms, std::exp(hi)) < target) {
    hi += 2.0;
    if (hi - lo > 200.0) throw NumericError("imhof_tail: truncation bound out of reach");
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_tail_bound_inverse(terms, std::exp(mid)) < target ? lo : hi) = mid;
  }
  double U = std::exp(hi);
  const double log_tol = std::log(0.5 * accuracy);
  if (oscillation_cutoff_ok(terms, x, U, log_tol)) {
    double a = std::log(1.0 / terms.front().first) - 10.0, b = hi;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (a + b);
      (oscillation_cutoff_ok(terms, x, std::exp(mid), log_tol) ? b : a) = mid;
    }
    U = std::exp(b);
  }

  const ImhofIntegrand f(std::move(terms), x, U);
  const double period = 4.0 * kPi / x;
  const double panel_count = std::ceil(U / period);
  if (panel_count > 2e6) throw NumericError("imhof_tail: integration range too long");
  const int panels = std::max(1, static_cast<int>(panel_count));
  const double width = U / panels;
  const double tol = 0.5 * kPi * accuracy / panels;
  double integral = 0.0;
  for (int i = 0; i < panels; ++i) {
    integral += integrate_adaptive(std::cref(f), i * width, (i + 1) * width, tol, 0.0, 200);
  }
  return std::clamp(0.5 + integral / kPi, 0.0, 1.0);
}

AsymptoticLaw::AsymptoticLaw(const WeightSpec& weight, int q, int K_max)
    : q_(q), coeffs_(projunif::coefficients(weight, q, K_max)) {
  if (K_max < 1) throw std::domain_error("K_max must be >= 1");
  prefix_.assign(K_max + 1, Cumulants{});
  for (int k = 1; k <= K_max; ++k) {
    const double b = coeffs_.b[k];
    if (b < 0.0) {
      throw std::domain_error("negative Gegenbauer coefficient at k = " + std::to_string(k) +
                              "; the weight does not define a Sobolev statistic");
    }
    prefix_[k] = add_term(prefix_[k - 1], mixture_weight(b, k, q), eigen_dim(k, q));
  }
}

double AsymptoticLaw::hbe_pvalue(double x, int K) const {
  return hbe_tail(prefix_.at(K), x);
}

int AsymptoticLaw::truncation(double x, double delta) const {
  const int K_max = coeffs_.K();
  if (delta <= 0.0) return K_max;
  const double full = hbe_pvalue(x, K_max);
  int lo = 1, hi = K_max;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (prefix_[mid].k2 > 0.0 && std::abs(hbe_pvalue(x, mid) - full) <= delta) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

double AsymptoticLaw::pvalue(double x, double delta, double accuracy) const {
  if (x <= 0.0) return 1.0;
  const int K = truncation(x, delta);
  CoeffSeq head{coeffs_.q, coeffs_.weight_id,
                std::vector<double>(coeffs_.b.begin(), coeffs_.b.begin() + K + 1)};
  const double p = imhof_tail(mixture_weights(head), x, accuracy);
  if (p <= accuracy) return 0.0;
  if (p >= 1.0 - accuracy) return 1.0;
  return p;
}

double AsymptoticLaw::quantile(double alpha, double delta, double accuracy) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  const Cumulants& c = prefix_.back();
  const double guess = solve_decreasing(
      [&](double x) { return hbe_tail(c, x) - alpha; }, 0.5 * c.k1, 2.0 * c.k1 + 1.0);
  return solve_decreasing([&](double x) { return pvalue(x, delta, accuracy) - alpha; },
                          0.97 * guess, 1.03 * guess);
}

double series_pvalue(const WeightSpec& weight, int q, double x, const TailQuery& query) {
  if (x <= 0.0) return 1.0;
  return AsymptoticLaw(weight, q, query.K_max).pvalue(x, query.delta, query.imhof_accuracy);
}

double mixture_quantile(const WeightSpec& weight, int q, double alpha, const TailQuery& query) {
  return AsymptoticLaw(weight, q, query.K_max)
      .quantile(alpha, query.delta, query.imhof_accuracy);
}

}  // namespace projunif
