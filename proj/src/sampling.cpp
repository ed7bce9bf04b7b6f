#include "projunif/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>

#include "projunif/coeffs.hpp"
#include "projunif/projdist.hpp"
#include "projunif/specfun.hpp"

namespace projunif {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

UnitSample sample_uniform(int n, int q, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  if (q < 1) throw std::invalid_argument("dimension q must be >= 1");
  const int d = q + 1;
  std::vector<double> x(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    double ss = 0.0;
    do {
      ss = 0.0;
      for (int c = 0; c < d; ++c) {
        const double v = rng.normal();
        x[static_cast<std::size_t>(i) * d + c] = v;
        ss += v * v;
      }
    } while (ss == 0.0);
    const double s = 1.0 / std::sqrt(ss);
    for (int c = 0; c < d; ++c) x[static_cast<std::size_t>(i) * d + c] *= s;
  }
  return UnitSample(q, std::move(x));
}

std::vector<double> random_directions(int k, int q, RngStream& rng) {
  return sample_uniform(k, q, rng).x;
}

std::vector<double> uniform_tangent(int q, RngStream& rng) {
  if (q == 1) return {rng.uniform() < 0.5 ? -1.0 : 1.0};
  std::vector<double> xi(q);
  double ss = 0.0;
  do {
    ss = 0.0;
    for (double& v : xi) {
      v = rng.normal();
      ss += v * v;
    }
  } while (ss == 0.0);
  const double s = 1.0 / std::sqrt(ss);
  for (double& v : xi) v *= s;
  return xi;
}

std::vector<double> tangent_normal(double t, const std::vector<double>& xi,
                                   const std::vector<double>& mu) {
  const std::size_t d = mu.size();
  if (d < 2 || xi.size() + 1 != d) throw std::invalid_argument("tangent_normal: size mismatch");
  t = std::clamp(t, -1.0, 1.0);
  const double s = std::sqrt((1.0 - t) * (1.0 + t));
  std::vector<double> y(d, 0.0);
  for (std::size_t c = 0; c + 1 < d; ++c) y[c] = s * xi[c];
  y[d - 1] = t;
  // Householder reflection with v = mu - e_d maps e_d to mu.
  std::vector<double> v(mu);
  v[d - 1] -= 1.0;
  double vv = 0.0, vy = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    vv += v[c] * v[c];
    vy += v[c] * y[c];
  }
  if (vv > 1e-30) {
    const double f = 2.0 * vy / vv;
    for (std::size_t c = 0; c < d; ++c) y[c] -= f * v[c];
  }
  return y;
}

// ---- tabulated inversion ---------------------------------------------------

TangentSampler::TangentSampler(const std::function<double(double)>& g, int q, int cells)
    : q_(q), step_(kPi / cells) {
  if (q < 1) throw std::invalid_argument("dimension q must be >= 1");
  if (cells < 2) throw std::invalid_argument("TangentSampler: too few cells");
  auto h = [&](double phi) {
    const double v = g(std::cos(phi));
    return std::max(v, 0.0) * (q == 1 ? 1.0 : std::pow(std::sin(phi), q - 1));
  };
  const auto rule = gauss_legendre(8);
  cum_.assign(cells + 1, 0.0);
  density_.assign(cells + 1, 0.0);
  CompensatedSum total;
  for (int i = 0; i <= cells; ++i) density_[i] = h(i * step_);
  for (int i = 0; i < cells; ++i) {
    const double a = i * step_;
    double m = 0.0;
    for (int j = 0; j < rule->order(); ++j) {
      m += rule->weights[j] * h(a + 0.5 * step_ * (1.0 + rule->nodes[j]));
    }
    total.add(0.5 * step_ * m);
    cum_[i + 1] = total.value();
  }
  const double norm = total.value();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("tangent density has non-finite or non-positive mass");
  }
  for (double& c : cum_) c /= norm;
  for (double& d : density_) d = std::isfinite(d) ? d / norm : 0.0;
  cum_.back() = 1.0;
}

double TangentSampler::quantile(double u) const {
  // Returns t = cos(phi) with P[phi <= phi_u] = 1 - u, so that P[T <= t] = u.
  const double target = 1.0 - std::clamp(u, 0.0, 1.0);
  const int cells = static_cast<int>(cum_.size()) - 1;
  int i = static_cast<int>(std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin()) - 1;
  i = std::clamp(i, 0, cells - 1);
  const double c0 = cum_[i], c1 = cum_[i + 1];
  const double mass = c1 - c0;
  if (mass <= 0.0) return std::cos((i + 0.5) * step_);
  // Monotone cubic Hermite of the cumulative mass over the cell.
  const double slope = mass / step_;
  double d0 = std::isfinite(density_[i]) ? density_[i] : 3.0 * slope;
  double d1 = std::isfinite(density_[i + 1]) ? density_[i + 1] : 3.0 * slope;
  const double al = d0 / slope, be = d1 / slope;
  if (al * al + be * be > 9.0) {
    const double tau = 3.0 / std::sqrt(al * al + be * be);
    d0 *= tau;
    d1 *= tau;
  }
  const double m0 = d0 * step_ / mass, m1 = d1 * step_ / mass;
  const double r = (target - c0) / mass;
  auto P = [&](double s) {
    const double s2 = s * s, s3 = s2 * s;
    return (-2.0 * s3 + 3.0 * s2) + m0 * (s3 - 2.0 * s2 + s) + m1 * (s3 - s2);
  };
  auto dP = [&](double s) {
    const double s2 = s * s;
    return (-6.0 * s2 + 6.0 * s) + m0 * (3.0 * s2 - 4.0 * s + 1.0) + m1 * (3.0 * s2 - 2.0 * s);
  };
  double lo = 0.0, hi = 1.0, s = r;
  for (int it = 0; it < 40; ++it) {
    const double f = P(s) - r;
    if (std::abs(f) <= 1e-15) break;
    (f < 0.0 ? lo : hi) = s;
    const double dp = dP(s);
    double next = dp > 0.0 ? s - f / dp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15) break;
    s = next;
  }
  return std::cos((i + s) * step_);
}

double TangentSampler::cdf(double t) const {
  const double phi = std::acos(std::clamp(t, -1.0, 1.0));
  const int cells = static_cast<int>(cum_.size()) - 1;
  const double pos = phi / step_;
  const int i = std::clamp(static_cast<int>(pos), 0, cells - 1);
  const double s = pos - i;
  return 1.0 - (cum_[i] + s * (cum_[i + 1] - cum_[i]));
}

std::shared_ptr<const TangentSampler> tangent_sampler(const std::string& id,
                                                      const std::function<double(double)>& g,
                                                      int q) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const TangentSampler>> cache;
  const std::string key = id + "|" + std::to_string(q);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const TangentSampler>(g, q);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

// ---- local alternatives ----------------------------------------------------

double SeriesDensity::operator()(double z) const {
  const double lambda = 0.5 * (q - 1);
  CompensatedSum s;
  s.add(1.0);
  if (K_r >= 1) s.add(a[0] * z);
  double r0 = 1.0, r1 = z;
  for (int k = 2; k <= K_r; ++k) {
    const double r2 = (2.0 * (k + lambda - 1.0) * z * r1 - (k - 1.0) * r0) / (k + 2.0 * lambda - 1.0);
    r0 = r1;
    r1 = r2;
    s.add(a[k - 1] * r2);
  }
  return s.value();
}

SeriesDensity build_fW(const WeightSpec& weight, int q, double r, int K_max) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("retained fraction must lie in (0, 1]");
  const CoeffSeq seq = coefficients(weight, q, K_max);
  std::vector<double> coef(K_max), norm(K_max);
  CompensatedSum total;
  // Atomic weights take the sign of the cap-indicator expansion at F_q^{-1}(t).
  const bool atomic = weight.kind == WeightKind::Rothman || weight.kind == WeightKind::Dirac;
  const double x_atom = atomic ? proj_quantile(q, weight.param) : 0.0;
  for (int k = 1; k <= K_max; ++k) {
    const double b = std::max(seq.b[k], 0.0);
    coef[k - 1] = q == 1 ? std::sqrt(2.0 * b) : (1.0 + 2.0 * k / (q - 1)) * std::sqrt(b);
    if (atomic && gegenbauer(k - 1, 0.5 * (q + 1), x_atom) < 0.0) coef[k - 1] = -coef[k - 1];
    norm[k - 1] = coef[k - 1] * coef[k - 1] * gegenbauer_norm(k, q);
    total.add(norm[k - 1]);
  }
  SeriesDensity f;
  f.q = q;
  f.full_norm = total.value();
  CompensatedSum partial;
  int K = 0;
  while (K < K_max && partial.value() < r * f.full_norm) partial.add(norm[K++]);
  f.K_r = std::max(K, 1);
  f.retained = partial.value();
  f.a.resize(f.K_r);
  for (int k = 1; k <= f.K_r; ++k) {
    const double log_at_one =
        q == 1 ? 0.0 : std::lgamma(k + q - 1.0) - std::lgamma(k + 1.0) - std::lgamma(q - 1.0);
    f.a[k - 1] = coef[k - 1] * std::exp(log_at_one);
  }
  double lo = INFINITY;
  for (int i = 0; i <= 10000; ++i) lo = std::min(lo, f(-1.0 + 2.0 * i / 10000.0));
  f.grid_min = lo;
  return f;
}

double circle_cvm_density(double z) {
  return 1.0 - std::sqrt(2.0) * std::log(2.0 * (1.0 - z)) / (2.0 * kPi);
}

AlternativeSpec AlternativeSpec::uniform() { return {}; }

AlternativeSpec AlternativeSpec::local(const WeightSpec& w, double kappa, double r) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
  AlternativeSpec s;
  s.kind = AltKind::LocalW;
  s.weight = w;
  s.kappa = kappa;
  s.r = r;
  return s;
}

AlternativeSpec AlternativeSpec::vmf(double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("vMF concentration must be >= 0");
  AlternativeSpec s;
  s.kind = AltKind::VMF;
  s.eta = eta;
  return s;
}

AlternativeSpec AlternativeSpec::watson(double eta) {
  AlternativeSpec s;
  s.kind = AltKind::Watson;
  s.eta = eta;
  return s;
}

AlternativeSpec AlternativeSpec::small_circle(double eta, double tau) {
  if (!(tau >= -1.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [-1, 1]");
  AlternativeSpec s;
  s.kind = AltKind::SmallCircle;
  s.eta = eta;
  s.tau = tau;
  return s;
}

AlternativeSpec AlternativeSpec::rothman_closed(double t, double kappa) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("Rothman t must lie in (0, 1)");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
  AlternativeSpec s;
  s.kind = AltKind::RtClosedForm;
  s.t = t;
  s.kappa = kappa;
  return s;
}

AlternativeSpec AlternativeSpec::preset(const std::string& raw, double kappa) {
  std::string name = raw;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (name == "uniform" || name == "null") return uniform();
  if (name == "cvm") return local(WeightSpec::cvm(), kappa);
  if (name == "ad") return local(WeightSpec::ad(), kappa);
  if (name == "rt") return rothman_closed(1.0 / 3.0, kappa);
  if (name == "vmf") return vmf(kappa);
  if (name == "wat" || name == "w" || name == "watson") return watson(2.5 * kappa);
  if (name == "sc") return small_circle(-1.5 * kappa, 0.5);
  throw std::invalid_argument("unknown alternative: " + raw);
}

std::string AlternativeSpec::id() const {
  char buf[160];
  switch (kind) {
    case AltKind::Uniform:
      return "uniform";
    case AltKind::LocalW:
      std::snprintf(buf, sizeof buf, "local(%s,kappa=%.6g,r=%.6g)", weight.id().c_str(), kappa, r);
      return buf;
    case AltKind::VMF:
      std::snprintf(buf, sizeof buf, "vmf(eta=%.6g)", eta);
      return buf;
    case AltKind::Watson:
      std::snprintf(buf, sizeof buf, "watson(eta=%.6g)", eta);
      return buf;
    case AltKind::SmallCircle:
      std::snprintf(buf, sizeof buf, "sc(eta=%.6g,tau=%.6g)", eta, tau);
      return buf;
    case AltKind::RtClosedForm:
      std::snprintf(buf, sizeof buf, "rt(t=%.6g,kappa=%.6g)", t, kappa);
      return buf;
  }
  return "unknown";
}

AlternativeSampler::AlternativeSampler(const AlternativeSpec& spec, int q) : spec_(spec), q_(q) {
  if (q < 1) throw std::invalid_argument("dimension q must be >= 1");
  mu_ = spec.mu;
  if (mu_.empty()) {
    mu_.assign(q + 1, 0.0);
    mu_.back() = 1.0;
  }
  if (static_cast<int>(mu_.size()) != q + 1) throw std::invalid_argument("mu has wrong length");
  double nn = 0.0;
  for (double v : mu_) nn += v * v;
  if (!(nn > 0.0)) throw std::invalid_argument("mu must be non-zero");
  for (double& v : mu_) v /= std::sqrt(nn);

  const double eta = spec.eta;
  switch (spec.kind) {
    case AltKind::Uniform:
    case AltKind::RtClosedForm:
      break;
    case AltKind::VMF:
      table_ = tangent_sampler(spec.id(), [eta](double t) { return std::exp(eta * (t - 1.0)); }, q);
      break;
    case AltKind::Watson: {
      const double top = std::max(eta, 0.0);
      table_ = tangent_sampler(spec.id(), [eta, top](double t) { return std::exp(eta * t * t - top); },
                               q);
      break;
    }
    case AltKind::SmallCircle: {
      const double tau = spec.tau;
      const double top = eta > 0.0 ? eta * std::max((1.0 - tau) * (1.0 - tau), (1.0 + tau) * (1.0 + tau))
                                   : 0.0;
      table_ = tangent_sampler(
          spec.id(), [eta, tau, top](double t) { return std::exp(eta * (t - tau) * (t - tau) - top); },
          q);
      break;
    }
    case AltKind::LocalW: {
      const std::string key = "fW:" + spec.weight.id() + ":" + std::to_string(spec.r);
      if (q == 1 && spec.weight.kind == WeightKind::CvM) {
        table_ = tangent_sampler("fW:cvm:closed", circle_cvm_density, q);
        series_min_ = circle_cvm_density(-1.0);
      } else {
        auto f = std::make_shared<SeriesDensity>(build_fW(spec.weight, q, spec.r));
        series_min_ = f->grid_min;
        series_terms_ = f->K_r;
        if (f->grid_min < 0.0) {
          std::fprintf(stderr, "note: truncated f^W for %s, q = %d has minimum %.3g; clamped at 0\n",
                       spec.weight.id().c_str(), q, f->grid_min);
        }
        table_ = tangent_sampler(key, [f](double t) { return (*f)(t); }, q);
      }
      break;
    }
  }
}

double AlternativeSampler::draw_t(RngStream& rng) const {
  switch (spec_.kind) {
    case AltKind::Uniform:
      return proj_quantile(q_, rng.uniform());
    case AltKind::RtClosedForm: {
      const double u = rng.uniform();
      if (rng.uniform() >= spec_.kappa) return proj_quantile(q_, u);
      const double t = spec_.t;
      return u > t * t ? proj_quantile(q_, (u + t) / (1.0 + t)) : proj_quantile(q_, u / t);
    }
    case AltKind::LocalW: {
      const double u = rng.uniform();
      if (rng.uniform() >= spec_.kappa) return proj_quantile(q_, u);
      return table_->quantile(u);
    }
    default:
      return table_->draw(rng);
  }
}

UnitSample AlternativeSampler::draw(int n, RngStream& rng) const {
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  if (spec_.kind == AltKind::Uniform) return sample_uniform(n, q_, rng);
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(n) * (q_ + 1));
  for (int i = 0; i < n; ++i) {
    const double t = draw_t(rng);
    const auto xi = uniform_tangent(q_, rng);
    const auto p = tangent_normal(t, xi, mu_);
    x.insert(x.end(), p.begin(), p.end());
  }
  return UnitSample(q_, std::move(x));
}

UnitSample sample_alternative(const AlternativeSpec& spec, int n, int q, RngStream& rng) {
  return AlternativeSampler(spec, q).draw(n, rng);
}

}  // namespace projunif
