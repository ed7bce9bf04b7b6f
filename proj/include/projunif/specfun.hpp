#pragma once

// Special functions and quadrature used throughout the library.
//
// Everything here is a pure function of its arguments. Gauss-Legendre rules
// are cached per order in a process-wide table and handed out as shared
// immutable objects.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace projunif {

inline constexpr double kPi = std::numbers::pi;

/// Raised when an iterative numerical method cannot reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nodes and weights of a quadrature rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }

  /// Integrates f over [a, b] by affine mapping of the rule.
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      acc += weights[i] * f(mid + half * nodes[i]);
    }
    return half * acc;
  }
};

/// Degree and order of a Gegenbauer polynomial. For the circle (q = 1) the
/// order degenerates and Chebyshev polynomials of the first kind take over.
/// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct PolyOrder {
  int k = 0;
  double lambda = 0.5;
  bool chebyshev = false;

  static PolyOrder for_dimension(int k, int q);
};

double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// Inverse of x -> I_x(a, b): bracketed bisection followed by Newton polish.
double reg_inc_beta_inv(double p, double a, double b);

/// Regularized upper incomplete gamma Q(a, x).
double reg_gamma_upper(double a, double x);

/// P[chi^2_dof > x]; dof may be any positive real.
double chisq_upper_tail(double x, double dof);

/// C_k^lambda(z) by the three-term recurrence.
double gegenbauer(int k, double lambda, double z);

/// C_k^lambda(z) / C_k^lambda(1); bounded by one on [-1, 1].
double gegenbauer_normalized(int k, double lambda, double z);

/// T_k(z).
double chebyshev_t(int k, double z);

/// Evaluates the basis polynomial selected by `order` at z.
double gegenbauer(const PolyOrder& order, double z);

/// Basis polynomial of degree k for the sphere of dimension q: T_k for q = 1,
/// C_k^{(q-1)/2} otherwise.
double sphere_basis(int k, int q, double z);

/// Squared L2 norm c_{k,q} of the dimension-q basis polynomial of degree k
/// against the weight (1 - z^2)^{q/2 - 1}.
double gegenbauer_norm(int k, int q);

/// Gauss-Legendre rule of the given order; cached, thread safe.
std::shared_ptr<const QuadratureRule> gauss_legendre(int order);

/// Gauss-Chebyshev rule of the first kind: integrates h(x) / sqrt(1 - x^2).
QuadratureRule gauss_chebyshev(int order);

/// Terminating 4F3(1-k, q+k, (q+1)/2, 3q/2; q+1, q/2+1, (3q+1)/2; 1).
/// `max_abs_term`, when given, receives the largest |term| so callers can
/// judge the cancellation in the alternating sum.
double hyp4f3_unit(int k, int q, double* max_abs_term = nullptr);

/// Cin(x) = int_0^x (1 - cos t) / t dt.
double cin(double x);

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-12,
                          double rel_tol = 1e-12, int max_intervals = 4000);

}  // namespace projunif
