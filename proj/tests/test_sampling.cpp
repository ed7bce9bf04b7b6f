#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>

#include "projunif/projdist.hpp"
#include "projunif/sampling.hpp"
#include "projunif/specfun.hpp"
#include "projunif/statistics.hpp"

using namespace projunif;
using doctest::Approx;

namespace {

std::vector<double> projections(const UnitSample& s, const std::vector<double>& g) {
  std::vector<double> out;
  for (int i = 0; i < s.n(); ++i) {
    double p = 0;
    for (int c = 0; c < s.dim(); ++c) p += g[c] * s.row(i)[c];
    out.push_back(p);
  }
  return out;
}

double chi2_critical(int dof, double alpha) {
  boost::math::chi_squared d(dof);
  return boost::math::quantile(boost::math::complement(d, alpha));
}

// Pearson statistic of u-values against cell probabilities.
double pearson(const std::vector<double>& u, const std::vector<double>& probs) {
  const int B = static_cast<int>(probs.size());
  std::vector<double> count(B, 0.0);
  for (double v : u) count[std::min(B - 1, static_cast<int>(v * B))] += 1;
  double x = 0;
  for (int b = 0; b < B; ++b) {
    const double e = probs[b] * u.size();
    x += (count[b] - e) * (count[b] - e) / e;
  }
  return x;
}

}  // namespace

TEST_CASE("stream reproducibility") {
  RngStream a(5, 9), b(5, 9), c(5, 10);
  for (int i = 0; i < 5; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x != c.uniform());
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("uniform samples") {
  RngStream rng(20201, 0);
  auto big = sample_uniform(100000, 2, rng);
  double m[3] = {};
  for (int i = 0; i < big.n(); ++i)
    for (int c = 0; c < 3; ++c) m[c] += big.row(i)[c] / big.n();
  CHECK(std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) < 0.02);
  for (int i = 0; i < big.n(); ++i) {
    const double* r = big.row(i);
    CHECK(std::abs(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] - 1) < 1e-14);
  }
  for (int q : {2, 5}) {
    auto s = sample_uniform(10000, q, rng);
    std::vector<double> g(q + 1, 0.0);
    g[0] = 1;
    CHECK(ks_distance(projections(s, g), q) < 0.02);
  }
  auto circ = sample_uniform(20000, 1, rng);
  std::vector<double> u;
  for (double a : circ.angles()) u.push_back(a / (2 * kPi));
  CHECK(pearson(u, std::vector<double>(36, 1.0 / 36)) < chi2_critical(35, 0.01));
}

TEST_CASE("random directions") {
  RngStream rng(1, 1);
  const auto d = random_directions(10, 4, rng);
  REQUIRE(d.size() == 50);
  for (int k = 0; k < 10; ++k) {
    double s = 0;
    for (int c = 0; c < 5; ++c) s += d[5 * k + c] * d[5 * k + c];
    CHECK(s == Approx(1.0));
  }
}

TEST_CASE("tangent-normal decomposition") {
  const std::vector<double> mu{0.0, 0.6, 0.8};
  const std::vector<double> xi{1.0, 0.0};
  auto a = tangent_normal(1.0, xi, mu);
  auto b = tangent_normal(-1.0, xi, mu);
  for (int c = 0; c < 3; ++c) {
    CHECK(a[c] == Approx(mu[c]));
    CHECK(b[c] == Approx(-mu[c]));
  }
  auto z = tangent_normal(0.0, {1.0}, {0.0, 1.0});
  CHECK(std::abs(z[0]) == Approx(1.0));
  CHECK(z[1] == Approx(0.0).scale(1.0));
  RngStream rng(2, 2);
  for (int r = 0; r < 100; ++r) {
    const double t = 2 * rng.uniform() - 1;
    auto x = tangent_normal(t, uniform_tangent(2, rng), mu);
    double dot = 0, nn = 0;
    for (int c = 0; c < 3; ++c) {
      dot += x[c] * mu[c];
      nn += x[c] * x[c];
    }
    CHECK(dot == Approx(t).epsilon(1e-12));
    CHECK(nn == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tabulated tangent law") {
  RngStream rng(3, 0);
  for (int q : {1, 2, 4}) {
    TangentSampler flat([](double) { return 1.0; }, q);
    std::vector<double> t;
    for (int i = 0; i < 10000; ++i) t.push_back(flat.draw(rng));
    CHECK(ks_distance(t, q) < 0.02);
    for (double x : {-0.9, -0.2, 0.5}) CHECK(std::abs(flat.cdf(x) - proj_cdf(q, x)) < 1e-6);
  }
  const double eta = 2.0;
  TangentSampler vmf([eta](double t) { return std::exp(eta * (t - 1)); }, 2);
  for (double x : {-0.8, 0.0, 0.4, 0.95}) {
    const double ref = (std::exp(eta * x) - std::exp(-eta)) / (std::exp(eta) - std::exp(-eta));
    CHECK(std::abs(vmf.cdf(x) - ref) < 1e-6);
    CHECK(std::abs(vmf.quantile(ref) - x) < 1e-5);
  }
  TangentSampler wat([](double t) { return std::exp(50.0 * (t * t - 1)); }, 2);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += std::abs(wat.draw(rng)) > 0.9;
  CHECK(hits >= 9000);
}

TEST_CASE("von Mises-Fisher draws") {
  RngStream rng(4, 0);
  const double eta = 3.0;
  auto s = sample_alternative(AlternativeSpec::vmf(eta), 100000, 2, rng);
  double m = 0;
  for (int i = 0; i < s.n(); ++i) m += s.row(i)[2] / s.n();
  CHECK(m == Approx(1 / std::tanh(eta) - 1 / eta).epsilon(5e-3));
  auto flat = sample_alternative(AlternativeSpec::vmf(0.0), 10000, 3, rng);
  CHECK(ks_distance(projections(flat, {0, 0, 0, 1}), 3) < 0.02);
}

TEST_CASE("series densities") {
  const auto f = build_fW(WeightSpec::cvm(), 1);
  double err = 0;
  for (double z = -0.99; z <= 0.99; z += 0.001) err = std::max(err, std::abs(f(z) - circle_cvm_density(z)));
  CHECK(err < 2e-2);
  for (double t : {1.0 / 3, 0.6}) {
    const auto rt = build_fW(WeightSpec::rothman(t), 1, 0.9995, 20000);
    const double jump = proj_quantile(1, t);
    for (double z = -0.95; z <= 0.95; z += 0.01) {
      if (std::abs(z - jump) < 0.1) continue;
      CHECK(rt(z) == Approx((z >= jump ? 1.0 : 0.0) + t).epsilon(5e-2).scale(1.0));
    }
  }
  // Parseval on the orthogonal basis
  for (int q : {1, 2, 3}) {
    const auto s = build_fW(WeightSpec::ad(), q, 0.999, 120);
    auto gl = gauss_legendre(600);
    const double integral = gl->integrate(
        [&](double phi) {
          const double d = s(std::cos(phi)) - 1.0;
          return d * d * std::pow(std::sin(phi), q - 1);
        },
        0.0, kPi);
    CHECK(integral == Approx(s.retained).epsilon(1e-6));
  }
}

TEST_CASE("local alternatives") {
  RngStream rng(6, 0);
  const double kappa = 0.5;
  auto s = sample_alternative(AlternativeSpec::local(WeightSpec::cvm(), kappa), 10000, 1, rng);
  std::vector<double> u;
  for (int i = 0; i < s.n(); ++i) u.push_back(proj_cdf(1, s.row(i)[1]));
  // cell masses of (1 - kappa) + kappa f^CvM in u = F_1(z) = 1 - acos(z) / pi
  std::vector<double> probs;
  for (int b = 0; b < 36; ++b) {
    const double lo = b / 36.0, hi = (b + 1) / 36.0;
    const double m = integrate_adaptive(
        [&](double v) {
          // 2 (1 - z) = 4 sin^2(pi (1 - v) / 2) at z = -cos(pi v)
          const double s = std::sin(0.5 * kPi * (1 - v));
          return (1 - kappa) + kappa * (1 - std::sqrt(2.0) * std::log(4 * s * s) / (2 * kPi));
        },
        lo, hi,
        1e-12, 1e-10);
    probs.push_back(m);
  }
  CHECK(pearson(u, probs) < chi2_critical(35, 0.01));

  // closed-form Rothman alternative: the u-density is t then 1 + t
  const double t = 1.0 / 3;
  auto r = sample_alternative(AlternativeSpec::rothman_closed(t, 1.0), 20000, 2, rng);
  std::vector<double> ur;
  for (int i = 0; i < r.n(); ++i) ur.push_back(proj_cdf(2, r.row(i)[2]));
  std::vector<double> pr;
  for (int b = 0; b < 30; ++b) {
    const double lo = b / 30.0, hi = (b + 1) / 30.0;
    const double cut = std::clamp(t, lo, hi);
    pr.push_back(t * (cut - lo) + (1 + t) * (hi - cut));
  }
  CHECK(pearson(ur, pr) < chi2_critical(29, 0.01));
}

TEST_CASE("presets") {
  CHECK(AlternativeSpec::preset("wat", 0.5).eta == Approx(1.25));
  CHECK(AlternativeSpec::preset("sc", 0.5).eta == Approx(-0.75));
  CHECK(AlternativeSpec::preset("sc", 0.5).tau == Approx(0.5));
  CHECK(AlternativeSpec::preset("vmf", 0.5).eta == Approx(0.5));
  CHECK_THROWS_AS(AlternativeSpec::preset("nope", 0.5), std::invalid_argument);
  RngStream a(9, 1), b(9, 1);
  auto x = sample_alternative(AlternativeSpec::preset("sc", 0.5), 50, 3, a);
  auto y = sample_alternative(AlternativeSpec::preset("sc", 0.5), 50, 3, b);
  CHECK(x.x == y.x);
}
