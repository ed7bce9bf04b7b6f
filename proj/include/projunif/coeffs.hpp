#pragma once

// Gegenbauer (Chebyshev for q = 1) coefficients of A(theta, x) and of the
// kernels psi_q^W, and the weighted chi-square law they induce.

#include <string>
#include <vector>

#include "projunif/weight.hpp"

namespace projunif {

/// Coefficients b_0..b_K of a kernel in the dimension-q basis.
struct CoeffSeq {
  int q = 1;
  std::string weight_id;
  std::vector<double> b;

  int K() const { return static_cast<int>(b.size()) - 1; }
};

/// Weights and degrees of freedom of sum_k w_k Y_k, Y_k ~ chi^2_{d_k}.
/// Degrees of freedom are stored as doubles: for large q they exceed any
/// integer type long before the truncation point.
struct ChiSqMixture {
  std::vector<double> w;
  std::vector<double> d;

  std::size_t size() const { return w.size(); }
  /// Keeps the first `terms` entries.
  ChiSqMixture prefix(std::size_t terms) const;
};

/// d_{k,q}; 2 on the circle.
double eigen_dim(int k, int q);

/// Coefficient of C_k^{(q-1)/2}(cos theta) (T_k for q = 1) in A(theta, x).
double a_coeff(int k, int q, double x);

/// a_1..a_K at a fixed x; out[k-1] = a_k.
std::vector<double> a_coeff_sequence(int q, double x, int K);

double b_cvm(int k, int q);
double b_ad(int k, int q);
double b_rothman(int k, int q, double t);

/// b_0..b_K by quadrature against dW(F_q(x)). Gauss rules in x are sized so
/// the Cramer-von Mises integrands are integrated exactly; Anderson-Darling
/// gets additional nodes. Atoms evaluate a_k directly. Density weights use a
/// Stieltjes sum over `cells` equal cells in u = F_q(x).
std::vector<double> b_coeff_generic_sequence(const WeightSpec& weight, int q, int K,
                                             int cells = 5120);

/// Single coefficient through the generic path.
double b_coeff_generic(const WeightSpec& weight, int k, int q);

/// b_0..b_K from the most specific available formula, memoized per
/// (weight, q) and optionally persisted under the cache directory.
CoeffSeq coefficients(const WeightSpec& weight, int q, int K);

/// Maps b_1..b_K to the asymptotic null law. Zero coefficients are dropped;
/// negative ones raise std::domain_error.
ChiSqMixture mixture_weights(const CoeffSeq& coeffs);

/// Directory for persisted coefficient files. Defaults to $PROJUNIF_CACHE_DIR;
/// an empty string disables persistence.
void set_cache_dir(const std::string& dir);
std::string cache_dir();

/// Drops the in-memory coefficient cache (tests use it to force recomputation).
void clear_coefficient_cache();

}  // namespace projunif
