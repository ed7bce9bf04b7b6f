#pragma once

// Upper tails of Q = sum_k w_k Y_k, Y_k ~ chi^2_{d_k} independent.

#include <vector>

#include "projunif/coeffs.hpp"
#include "projunif/weight.hpp"

namespace projunif {

inline constexpr int kDefaultKmax = 50000;
inline constexpr double kDefaultImhofAccuracy = 1e-6;

struct TailQuery {
  int K_max = kDefaultKmax;
  double delta = 0.0;
  double imhof_accuracy = kDefaultImhofAccuracy;
};

struct Cumulants {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
};

Cumulants mixture_cumulants(const ChiSqMixture& mix);

/// Three-cumulant gamma match.
double hbe_tail(const ChiSqMixture& mix, double x);
double hbe_tail(const Cumulants& c, double x);

/// Imhof inversion of the characteristic function. Throws NumericError when
/// the truncation point needed for `accuracy` is out of reach.
double imhof_tail(const ChiSqMixture& mix, double x,
                  double accuracy = kDefaultImhofAccuracy);

/// Asymptotic null law of a projected-ecdf statistic, built once and queried
/// many times.
class AsymptoticLaw {
 public:
  AsymptoticLaw(const WeightSpec& weight, int q, int K_max = kDefaultKmax);

  int q() const { return q_; }
  int K_max() const { return coeffs_.K(); }
  const CoeffSeq& coefficients() const { return coeffs_; }

  /// HBE tail using the first K coefficients.
  double hbe_pvalue(double x, int K) const;
  /// Smallest K whose HBE tail is within delta of the K_max tail.
  int truncation(double x, double delta) const;
  double pvalue(double x, double delta = 0.0,
                double accuracy = kDefaultImhofAccuracy) const;
  /// x with pvalue(x) = alpha.
  double quantile(double alpha, double delta = 0.0,
                  double accuracy = kDefaultImhofAccuracy) const;

 private:
  int q_;
  CoeffSeq coeffs_;
  std::vector<Cumulants> prefix_;  // prefix_[K] over k = 1..K
};

/// Imhof tail of the series law truncated where the HBE tail settles within
/// query.delta.
double series_pvalue(const WeightSpec& weight, int q, double x,
                     const TailQuery& query = {});
double mixture_quantile(const WeightSpec& weight, int q, double alpha,
                        const TailQuery& query = {});

}  // namespace projunif
