#pragma once

// Random generation on the sphere: uniform draws, rotationally symmetric
// alternatives through the tangent-normal decomposition, and the local
// alternatives built from the projected-ecdf coefficients.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "projunif/chi2mix.hpp"
#include "projunif/sample.hpp"
#include "projunif/weight.hpp"

namespace projunif {

/// mt19937_64 seeded from (seed, stream) through a seed_seq.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

UnitSample sample_uniform(int n, int q, RngStream& rng);

/// k directions, uniform on the sphere, as k rows of q + 1.
std::vector<double> random_directions(int k, int q, RngStream& rng);

/// Uniform on the sphere of dimension q - 1 (q coordinates); {-1, 1} for q = 1.
std::vector<double> uniform_tangent(int q, RngStream& rng);

/// t mu + sqrt(1 - t^2) B_mu xi, with B_mu the Householder reflection taking
/// the last basis vector to mu. xi has q coordinates, mu has q + 1.
std::vector<double> tangent_normal(double t, const std::vector<double>& xi,
                                   const std::vector<double>& mu);

/// Draws t with density proportional to g(t) (1 - t^2)^{q/2 - 1} by inverting a
/// tabulated cdf in the angle phi = acos(t).
class TangentSampler {
 public:
  TangentSampler(const std::function<double(double)>& g, int q, int cells = 2048);

  double quantile(double u) const;
  double draw(RngStream& rng) const { return quantile(rng.uniform()); }
  /// P[T <= t] from the table.
  double cdf(double t) const;
  int q() const { return q_; }

 private:
  int q_;
  double step_;
  std::vector<double> cum_;      // cumulative mass in phi, normalized
  std::vector<double> density_;  // phi density at nodes, normalized
};

/// Memoized sampler per (id, q).
std::shared_ptr<const TangentSampler> tangent_sampler(const std::string& id,
                                                      const std::function<double(double)>& g,
                                                      int q);

/// Truncated series 1 + sum_{k <= K_r} (1 + 2k/(q-1)) sqrt(b_k) C_k^{(q-1)/2}(z)
/// (1 + sum sqrt(2 b_k) T_k(z) on the circle).
struct SeriesDensity {
  int q = 1;
  int K_r = 0;
  double retained = 0.0;    // squared norm of the kept terms
  double full_norm = 0.0;   // squared norm at K_max
  std::vector<double> a;    // a[k-1] multiplies the basis normalized to one at z = 1
  double grid_min = 0.0;    // minimum over a 10^4-point grid of [-1, 1]

  double operator()(double z) const;
};

SeriesDensity build_fW(const WeightSpec& weight, int q, double r = 0.9995,
                       int K_max = kDefaultKmax);

/// 1 - sqrt(2) log(2 (1 - z)) / (2 pi).
double circle_cvm_density(double z);

enum class AltKind { Uniform, LocalW, VMF, Watson, SmallCircle, RtClosedForm };

struct AlternativeSpec {
  AltKind kind = AltKind::Uniform;
  WeightSpec weight = WeightSpec::cvm();
  double kappa = 0.0;  // LocalW / RtClosedForm mixing weight
  double eta = 0.0;
  double tau = 0.0;
  double t = 1.0 / 3.0;
  double r = 0.9995;
  std::vector<double> mu;  // empty: last basis vector

  static AlternativeSpec uniform();
  static AlternativeSpec local(const WeightSpec& w, double kappa, double r = 0.9995);
  static AlternativeSpec vmf(double eta);
  static AlternativeSpec watson(double eta);
  static AlternativeSpec small_circle(double eta, double tau);
  static AlternativeSpec rothman_closed(double t, double kappa);

  /// Named deviation of strength kappa: cvm, ad, rt (t = 1/3), vmf (eta =
  /// kappa), wat (eta = 2.5 kappa), sc (eta = -1.5 kappa, tau = 0.5), uniform.
  static AlternativeSpec preset(const std::string& name, double kappa);

  std::string id() const;
};

/// Builds tables once and draws samples of any size.
class AlternativeSampler {
 public:
  AlternativeSampler(const AlternativeSpec& spec, int q);

  UnitSample draw(int n, RngStream& rng) const;
  const AlternativeSpec& spec() const { return spec_; }
  /// Minimum of the truncated f^W on its grid (LocalW only); negative values
  /// were clamped to zero.
  double series_min() const { return series_min_; }
  int series_terms() const { return series_terms_; }

 private:
  double draw_t(RngStream& rng) const;

  AlternativeSpec spec_;
  int q_;
  std::vector<double> mu_;
  std::shared_ptr<const TangentSampler> table_;
  double series_min_ = 0.0;
  int series_terms_ = 0;
};

UnitSample sample_alternative(const AlternativeSpec& spec, int n, int q, RngStream& rng);

}  // namespace projunif
