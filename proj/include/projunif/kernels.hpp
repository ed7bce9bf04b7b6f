#pragma once

// Cap-intersection function A(theta, x) and the U-statistic kernels psi_q^W.

#include <vector>

#include "projunif/weight.hpp"

namespace projunif {

inline constexpr int kKernelNodes = 160;

/// nu_q-measure of {gamma : gamma'X_i <= x, gamma'X_j <= x} for two points at
/// angle theta.
double cap_intersection(int q, double theta, double x, int nodes = kKernelNodes);

/// Kernel of a probability (or atomic) weight from its defining integral.
/// Atoms are evaluated through cap_intersection directly; Anderson-Darling is
/// forwarded to psi_ad_integral.
double psi_generic(int q, double theta, const WeightSpec& weight,
                   int nodes = kKernelNodes);

/// Cramer-von Mises kernel: closed forms for q <= 3, integral form above.
double psi_cvm(int q, double theta);
/// Integral form of the Cramer-von Mises kernel, q >= 2.
double psi_cvm_integral(int q, double theta, int nodes = kKernelNodes);

/// Rothman kernel: closed forms for q <= 3, integral form above.
double psi_rothman(int q, double theta, double t);
double psi_rothman_integral(int q, double theta, double t,
                            int nodes = kKernelNodes);
/// 2 acos(F_q^{-1}(1 - t_m)); the Rothman kernel is constant beyond it.
double rothman_threshold(int q, double t);

/// Anderson-Darling kernel: closed form for q = 1, printed single integrals for
/// q = 2, 3, general integral for q >= 4. Zero at theta = 0.
double psi_ad(int q, double theta);
double psi_ad_integral(int q, double theta, int nodes = kKernelNodes);

/// Dispatches to the most specific kernel for the weight.
double psi(int q, double theta, const WeightSpec& weight);

/// int u^2 dW(u) over the symmetrized weight; enters the n-dependent constant
/// of the U-statistic. The symmetrized first moment is always 1/2.
double weight_second_moment(const WeightSpec& weight);

/// psi tabulated on a uniform theta grid with four-point Lagrange
/// interpolation. Kernels that are flat past a threshold (Rothman) are
/// tabulated only up to it.
class KernelTable {
 public:
  KernelTable(int q, const WeightSpec& weight, int intervals = 8192);

  double operator()(double theta) const {
    if (theta >= end_) return tail_;
    double pos = theta * inv_h_;
    int i = static_cast<int>(pos);
    if (i < 1) i = 1;
    if (i > last_) i = last_;
    const double s = pos - i;
    const double* v = values_.data() + (i - 1);
    // Lagrange weights for nodes at offsets -1, 0, 1, 2.
    const double sm1 = s - 1.0, sm2 = s - 2.0, sp1 = s + 1.0;
    return (-s * sm1 * sm2 * v[0] + 3.0 * sp1 * sm1 * sm2 * v[1] -
            3.0 * sp1 * s * sm2 * v[2] + sp1 * s * sm1 * v[3]) /
           6.0;
  }

  double end() const { return end_; }
  int q() const { return q_; }

 private:
  int q_;
  double end_;
  double inv_h_;
  double tail_;
  int last_;
  std::vector<double> values_;
};

}  // namespace projunif
