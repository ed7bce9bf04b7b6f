#include "projunif/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <queue>

namespace projunif {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw NumericError("reg_inc_beta: continued fraction did not converge");
}

double beta_density(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) {
    if ((x <= 0.0 && a < 1.0) || (x >= 1.0 && b < 1.0)) {
      return std::numeric_limits<double>::infinity();
    }
    if ((x <= 0.0 && a == 1.0) || (x >= 1.0 && b == 1.0)) {
      return std::exp(-log_beta(a, b));
    }
    return 0.0;
  }
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                  log_beta(a, b));
}

double gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericError("reg_gamma: series did not converge");
}

double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw NumericError("reg_gamma: continued fraction did not converge");
}

// Legendre P_n and its derivative at a block of abscissae simultaneously.
template <std::size_t B>
void legendre_block(int n, const std::array<double, B>& x,
                    std::array<double, B>& p, std::array<double, B>& dp) {
  std::array<double, B> p0{}, p1{};
  for (std::size_t b = 0; b < B; ++b) {
    p0[b] = 1.0;
    p1[b] = x[b];
  }
  for (int j = 2; j <= n; ++j) {
    const double c1 = (2.0 * j - 1.0) / j;
    const double c2 = (j - 1.0) / j;
    for (std::size_t b = 0; b < B; ++b) {
      const double p2 = c1 * x[b] * p1[b] - c2 * p0[b];
      p0[b] = p1[b];
      p1[b] = p2;
    }
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (n == 0) {
      p[b] = 1.0;
      dp[b] = 0.0;
    } else {
      p[b] = p1[b];
      dp[b] = n * (x[b] * p1[b] - p0[b]) / (x[b] * x[b] - 1.0);
    }
  }
}

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  constexpr std::size_t B = 16;
  const double nn = n;
  for (int start = 0; start < m; start += static_cast<int>(B)) {
    std::array<double, B> x{}, p{}, dp{};
    std::array<int, B> idx{};
    for (std::size_t b = 0; b < B; ++b) {
      const int i = std::min(start + static_cast<int>(b), m - 1) + 1;
      idx[b] = i;
      // Asymptotic guess for the i-th largest root, error O(n^-5) in the bulk.
      const double th = kPi * (4.0 * i - 1.0) / (4.0 * nn + 2.0);
      const double s = std::sin(th);
      const double n2 = nn * nn;
      x[b] = (1.0 - 1.0 / (8.0 * n2) + 1.0 / (8.0 * n2 * nn) -
              (39.0 - 28.0 / (s * s)) / (384.0 * n2 * n2)) *
             std::cos(th);
    }
    for (int iter = 0;; ++iter) {
      legendre_block<B>(n, x, p, dp);
      double worst = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double dx = p[b] / dp[b];
        x[b] -= dx;
        worst = std::max(worst, std::abs(dx));
      }
      if (worst < 1e-15) break;
      if (iter == 50) throw NumericError("gauss_legendre: Newton stalled");
    }
    for (std::size_t b = 0; b < B; ++b) {
      if (start + static_cast<int>(b) >= m) break;
      const int i = idx[b];
      // dp from the last pass; x moved by less than 1e-15 since.
      const double w = 2.0 / ((1.0 - x[b] * x[b]) * dp[b] * dp[b]);
      // Root i (1-based, descending) sits at position n - i ascending.
      rule.nodes[n - i] = x[b];
      rule.nodes[i - 1] = -x[b];
      rule.weights[n - i] = w;
      rule.weights[i - 1] = w;
    }
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

PolyOrder PolyOrder::for_dimension(int k, int q) {
  if (q < 1) throw std::domain_error("dimension q must be >= 1");
  PolyOrder order;
  order.k = k;
  order.chebyshev = (q == 1);
  order.lambda = 0.5 * (q - 1);
  return order;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("reg_inc_beta: parameters must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("reg_inc_beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double reg_inc_beta_inv(double p, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("reg_inc_beta_inv: parameters must be positive");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("reg_inc_beta_inv: p outside [0, 1]");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double x = 0.5;
  while (hi - lo > 1e-6) {
    x = 0.5 * (lo + hi);
    if (reg_inc_beta(x, a, b) < p) {
      lo = x;
    } else {
      hi = x;
    }
  }
  x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = reg_inc_beta(x, a, b) - p;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = beta_density(x, a, b);
    double next = x - f / dens;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4.0 * kEps * std::max(x, 1e-300) ||
        hi - lo <= 4.0 * kEps * std::max(x, 1e-300)) {
      return next;
    }
    x = next;
  }
  return x;
}

double reg_gamma_upper(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("reg_gamma_upper: a must be > 0");
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double chisq_upper_tail(double x, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("chisq_upper_tail: dof must be > 0");
  if (x <= 0.0) return 1.0;
  return reg_gamma_upper(0.5 * dof, 0.5 * x);
}

double gegenbauer(int k, double lambda, double z) {
  if (k < 0) throw std::domain_error("gegenbauer: negative degree");
  if (k == 0) return 1.0;
  double c0 = 1.0;
  double c1 = 2.0 * lambda * z;
  for (int j = 2; j <= k; ++j) {
    const double c2 =
        (2.0 * (j + lambda - 1.0) * z * c1 - (j + 2.0 * lambda - 2.0) * c0) / j;
    c0 = c1;
    c1 = c2;
  }
  return c1;
}

double gegenbauer_normalized(int k, double lambda, double z) {
  if (k < 0) throw std::domain_error("gegenbauer: negative degree");
  if (k == 0) return 1.0;
  double r0 = 1.0;
  double r1 = z;
  for (int j = 2; j <= k; ++j) {
    const double r2 = (2.0 * (j + lambda - 1.0) * z * r1 - (j - 1.0) * r0) /
                      (j + 2.0 * lambda - 1.0);
    r0 = r1;
    r1 = r2;
  }
  return r1;
}

double chebyshev_t(int k, double z) {
  if (k < 0) throw std::domain_error("chebyshev_t: negative degree");
  if (k >= 256 && std::abs(z) <= 1.0) return std::cos(k * std::acos(z));
  if (k == 0) return 1.0;
  double t0 = 1.0;
  double t1 = z;
  for (int j = 2; j <= k; ++j) {
    const double t2 = 2.0 * z * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

double gegenbauer(const PolyOrder& order, double z) {
  return order.chebyshev ? chebyshev_t(order.k, z)
                         : gegenbauer(order.k, order.lambda, z);
}

double sphere_basis(int k, int q, double z) {
  return gegenbauer(PolyOrder::for_dimension(k, q), z);
}

double gegenbauer_norm(int k, int q) {
  if (k < 0) throw std::domain_error("gegenbauer_norm: negative degree");
  if (q < 1) throw std::domain_error("gegenbauer_norm: q must be >= 1");
  if (q == 1) return k == 0 ? kPi : 0.5 * kPi;
  const double log_c = (3.0 - q) * std::log(2.0) + std::log(kPi) +
                       std::lgamma(q + k - 1.0) - std::log(q + 2.0 * k - 1.0) -
                       std::lgamma(k + 1.0) - 2.0 * std::lgamma(0.5 * (q - 1));
  return std::exp(log_c);
}

std::shared_ptr<const QuadratureRule> gauss_legendre(int order) {
  if (order < 1) throw std::domain_error("gauss_legendre: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const QuadratureRule>(build_gauss_legendre(order));
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.emplace(order, rule);
  return it->second;
}

QuadratureRule gauss_chebyshev(int order) {
  if (order < 1) throw std::domain_error("gauss_chebyshev: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.assign(order, kPi / order);
  for (int j = 0; j < order; ++j) {
    // Ascending: j = 0 is the node closest to -1.
    rule.nodes[j] = -std::cos((2.0 * j + 1.0) * kPi / (2.0 * order));
  }
  return rule;
}

double hyp4f3_unit(int k, int q, double* max_abs_term) {
  if (k < 1) throw std::domain_error("hyp4f3_unit: k must be >= 1");
  if (q < 2) throw std::domain_error("hyp4f3_unit: q must be >= 2");
  // Term ratios are rational, so the recurrence keeps each term to a few ulps.
  const long double qq = q;
  long double term = 1.0L, sum = 1.0L, biggest_ld = 1.0L;
  for (int j = 0; j + 1 < k; ++j) {
    term *= (static_cast<long double>(1 - k + j) * (qq + k + j) * (0.5L * (qq + 1) + j) *
             (1.5L * qq + j)) /
            ((qq + 1 + j) * (0.5L * qq + 1 + j) * (0.5L * (3 * qq + 1) + j) * (j + 1.0L));
    sum += term;
    biggest_ld = std::max(biggest_ld, std::abs(term));
  }
  const double biggest = static_cast<double>(biggest_ld);
  if (max_abs_term != nullptr) *max_abs_term = biggest;
  return static_cast<double>(sum);
}

double cin(double x) {
  if (x < 0.0) return cin(-x);
  if (x == 0.0) return 0.0;
  if (x <= 2.0) {
    // Alternating series with terms bounded by one on this range.
    double sum = 0.0;
    double power = 1.0;  // x^{2n} / (2n)!
    for (int n = 1; n < 60; ++n) {
      power *= x * x / ((2.0 * n - 1.0) * (2.0 * n));
      const double term = power / (2.0 * n);
      sum += (n % 2 == 1) ? term : -term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  // Ci(x) from the continued fraction of E1(ix).
  using cd = std::complex<double>;
  cd b(1.0, x);
  cd c(1.0 / 1e-300, 0.0);
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 2; i < 100000; ++i) {
    const double a = -static_cast<double>(i - 1) * (i - 1);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
  }
  h *= cd(std::cos(x), -std::sin(x));
  const double ci = -h.real();
  return std::numbers::egamma + std::log(x) - ci;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol,
                          int max_intervals) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  struct Piece {
    double lo, hi, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto kronrod = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const double fc = f(mid);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      const double dx = half * xgk[j];
      const double s = f(mid - dx) + f(mid + dx);
      resk += wgk[j] * s;
      if (j % 2 == 1) resg += wg[j / 2] * s;
    }
    return Piece{lo, hi, resk * half, std::abs((resk - resg) * half)};
  };

  std::priority_queue<Piece> heap;
  Piece first = kronrod(a, b);
  heap.push(first);
  double total = first.value;
  double total_err = first.error;
  int count = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         count < max_intervals) {
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Piece left = kronrod(worst.lo, mid);
    const Piece right = kronrod(mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

}  // namespace projunif
