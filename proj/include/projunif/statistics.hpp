#pragma once

// Test statistics on a sample of directions.

#include <memory>
#include <string>
#include <vector>

#include "projunif/chi2mix.hpp"
#include "projunif/kernels.hpp"
#include "projunif/sample.hpp"
#include "projunif/weight.hpp"

namespace projunif {

enum class TestKind {
  Projected,
  Watson,
  RothmanCircle,
  Ajne,
  Bakshaev,
  Rayleigh,
  Bingham,
  Gine,
  CCF09,
  ILRT
};

struct TestSpec {
  TestKind kind = TestKind::Projected;
  WeightSpec weight = WeightSpec::cvm();  // Projected only
  double param = 0.0;                     // t, number of directions, or kappa

  static TestSpec projected(const WeightSpec& w) { return {TestKind::Projected, w, 0.0}; }
  static TestSpec of(TestKind kind, double param = 0.0) {
    return {kind, WeightSpec::cvm(), param};
  }

  /// Machine id, round-trips through parse_test.
  std::string id() const;
  /// Column label in tables.
  std::string label() const;
  bool supports(int q) const;
  bool has_asymptotic(int q) const;
};

/// cvm, ad, rt[:t], dirac[:u], watson, rothman[:t], ajne, bakshaev, rayleigh,
/// bingham, gine, ccf09[:k], ilrt[:kappa]. Case-insensitive.
TestSpec parse_test(const std::string& text);

/// theta_ij for i < j in row-major pair order.
std::vector<double> pairwise_angles(const UnitSample& sample);

/// n-dependent constant of the projected statistic.
double projected_bias(const WeightSpec& weight, int n);

double stat_projected(const UnitSample& sample, const WeightSpec& weight);
double stat_projected_angles(const std::vector<double>& theta, int n, int q,
                             const WeightSpec& weight);

/// Circular statistics take angles in radians.
double stat_watson(const std::vector<double>& angles);
double stat_rothman_circle(const std::vector<double>& angles, double t);

double stat_ajne(const UnitSample& sample);
double stat_bakshaev(const UnitSample& sample);
/// E||X - Y|| for X, Y independent uniform on the sphere.
double mean_chord(int q);
double stat_rayleigh(const UnitSample& sample);
double stat_bingham(const UnitSample& sample);
double stat_gine(const UnitSample& sample);

/// sup_x |F_n(x) - F_q(x)| for projections onto one direction.
double ks_distance(std::vector<double> projections, int q);
/// Largest KS distance over the given directions (k rows of q + 1). Every
/// direction has the same null law, so this orders samples exactly as the
/// minimum of the per-direction p-values.
double stat_ccf09(const UnitSample& sample, const std::vector<double>& directions);

/// Invariant likelihood of the semicircle model on the circle, and its log.
double ilrt_semicircle(const std::vector<double>& angles, double kappa);
double ilrt_semicircle_log(const std::vector<double>& angles, double kappa);

/// Single statistic. CCF09 needs directions; ILRT reports the log likelihood.
double statistic(const TestSpec& test, const UnitSample& sample,
                 const std::vector<double>& directions = {});

/// Memoized law per (weight, q, K_max).
std::shared_ptr<const AsymptoticLaw> asymptotic_law(const WeightSpec& weight, int q,
                                                    int K_max = kDefaultKmax);

/// Asymptotic p-value of an observed statistic. Throws std::invalid_argument
/// for tests without an asymptotic law in this library.
double asymptotic_pvalue(double stat, const TestSpec& test, int q, const TailQuery& query = {});

/// Evaluates many statistics on one sample with a single pass over the pair
/// angles; projected kernels are tabulated.
class Battery {
 public:
  Battery(std::vector<TestSpec> tests, int q, std::vector<double> ccf_directions = {});

  const std::vector<TestSpec>& tests() const { return tests_; }
  int q() const { return q_; }
  std::vector<double> evaluate(const UnitSample& sample) const;

 private:
  std::vector<TestSpec> tests_;
  int q_;
  std::vector<double> directions_;
  std::vector<std::unique_ptr<KernelTable>> tables_;  // per test, Projected only
  double chord_ = 0.0;
};

}  // namespace projunif
