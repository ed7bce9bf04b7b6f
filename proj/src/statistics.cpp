#include "projunif/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "projunif/projdist.hpp"
#include "projunif/specfun.hpp"

namespace projunif {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

double watson_h(double theta) {
  const double s = theta / (2.0 * kPi);
  return 0.5 * (s * s - s + 1.0 / 6.0);
}

double rothman_h(double theta, double tm) {
  return std::max(tm - theta / (2.0 * kPi), 0.0) - tm * tm;
}

// 1 / E[sin theta] under uniformity.
double gine_constant(int q) {
  const double r = std::exp(std::lgamma(0.5 * q) - std::lgamma(0.5 * (q + 1)));
  return 0.5 * q * r * r;
}

// Plain sums over blocks of 256, compensated across blocks.
template <class F>
double pair_sum(const std::vector<double>& theta, F f) {
  CompensatedSum s;
  const std::size_t n = theta.size();
  for (std::size_t start = 0; start < n; start += 256) {
    const std::size_t stop = std::min(n, start + 256);
    double block = 0.0;
    for (std::size_t i = start; i < stop; ++i) block += f(theta[i]);
    s.add(block);
  }
  return s.value();
}

}  // namespace

std::string TestSpec::id() const {
  switch (kind) {
    case TestKind::Projected:
      return weight.id();
    case TestKind::Watson:
      return "watson";
    case TestKind::RothmanCircle:
      return "rothman-circle:" + fmt(param);
    case TestKind::Ajne:
      return "ajne";
    case TestKind::Bakshaev:
      return "bakshaev";
    case TestKind::Rayleigh:
      return "rayleigh";
    case TestKind::Bingham:
      return "bingham";
    case TestKind::Gine:
      return "gine";
    case TestKind::CCF09:
      return "ccf09:" + fmt(param);
    case TestKind::ILRT:
      return "ilrt:" + fmt(param);
  }
  return "unknown";
}

std::string TestSpec::label() const {
  switch (kind) {
    case TestKind::Projected:
      switch (weight.kind) {
        case WeightKind::CvM:
          return "CvM";
        case WeightKind::AD:
          return "AD";
        case WeightKind::Rothman:
          return "Rt";
        case WeightKind::Dirac:
          return "Dirac";
        case WeightKind::Density:
          return weight.label.empty() ? "W" : weight.label;
      }
      break;
    case TestKind::Watson:
      return "Watson";
    case TestKind::RothmanCircle:
      return "Rothman";
    case TestKind::Ajne:
      return "Ajne";
    case TestKind::Bakshaev:
      return "Bakshaev";
    case TestKind::Rayleigh:
      return "Rayleigh";
    case TestKind::Bingham:
      return "Bingham";
    case TestKind::Gine:
      return "Gine";
    case TestKind::CCF09:
      return "CCF09";
    case TestKind::ILRT:
      return "ILRT";
  }
  return "unknown";
}

bool TestSpec::supports(int q) const {
  switch (kind) {
    case TestKind::Watson:
    case TestKind::RothmanCircle:
    case TestKind::ILRT:
      return q == 1;
    default:
      return q >= 1;
  }
}

bool TestSpec::has_asymptotic(int q) const {
  if (!supports(q)) return false;
  switch (kind) {
    case TestKind::Projected:
    case TestKind::Watson:
    case TestKind::RothmanCircle:
    case TestKind::Ajne:
    case TestKind::Rayleigh:
    case TestKind::Bingham:
      return true;
    case TestKind::Bakshaev:
      return q == 2;
    default:
      return false;
  }
}

TestSpec parse_test(const std::string& text) {
  const std::string t = lower(text);
  std::string name = t, arg;
  if (auto pos = t.find(':'); pos != std::string::npos) {
    name = t.substr(0, pos);
    arg = t.substr(pos + 1);
  }
  auto number = [&](double fallback) { return arg.empty() ? fallback : parse_number(arg); };
  if (name == "watson") return TestSpec::of(TestKind::Watson);
  if (name == "rothman-circle") {
    const double v = number(1.0 / 3.0);
    if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("Rothman t must lie in (0, 1)");
    return TestSpec::of(TestKind::RothmanCircle, v);
  }
  if (name == "ajne") return TestSpec::of(TestKind::Ajne);
  if (name == "bakshaev") return TestSpec::of(TestKind::Bakshaev);
  if (name == "rayleigh") return TestSpec::of(TestKind::Rayleigh);
  if (name == "bingham") return TestSpec::of(TestKind::Bingham);
  if (name == "gine") return TestSpec::of(TestKind::Gine);
  if (name == "ccf09") {
    const double k = number(50.0);
    if (!(k >= 1.0) || k != std::floor(k)) {
      throw std::invalid_argument("ccf09 needs a positive integer number of directions");
    }
    return TestSpec::of(TestKind::CCF09, k);
  }
  if (name == "ilrt") {
    const double k = number(0.5);
    if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("ilrt kappa must lie in (0, 1)");
    return TestSpec::of(TestKind::ILRT, k);
  }
  WeightSpec w = parse_weight(text);
  if (w.kind == WeightKind::Rothman && !(w.param > 0.0 && w.param < 1.0)) {
    throw std::invalid_argument("Rothman t must lie in (0, 1)");
  }
  return TestSpec::projected(w);
}

std::vector<double> pairwise_angles(const UnitSample& sample) {
  const int n = sample.n();
  const int d = sample.dim();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    const double* a = sample.row(i);
    for (int j = i + 1; j < n; ++j) {
      const double* b = sample.row(j);
      double dot = 0.0;
      for (int c = 0; c < d; ++c) dot += a[c] * b[c];
      out.push_back(std::acos(std::clamp(dot, -1.0, 1.0)));
    }
  }
  return out;
}

double projected_bias(const WeightSpec& weight, int n) {
  switch (weight.kind) {
    case WeightKind::CvM:
      return (3.0 - 2.0 * n) / 6.0;
    case WeightKind::AD:
      return n;
    case WeightKind::Rothman: {
      const double t = weight.t_m();
      return 0.5 * (1.0 - n) + n * t * (1.0 - t);
    }
    case WeightKind::Dirac:
    case WeightKind::Density:
      return 0.5 - n * weight_second_moment(weight);
  }
  throw std::invalid_argument("unknown weight");
}

double stat_projected_angles(const std::vector<double>& theta, int n, int q,
                             const WeightSpec& weight) {
  if (n < 1) throw std::invalid_argument("empty sample");
  double sum = 0.0;
  const bool quadrature = weight.kind == WeightKind::Dirac || weight.kind == WeightKind::Density ||
                          (weight.kind == WeightKind::AD && q >= 4);
  if (quadrature && !theta.empty()) {
    // Evaluate once per distinct angle.
    std::vector<double> sorted = theta;
    std::sort(sorted.begin(), sorted.end());
    CompensatedSum s;
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      s.add(static_cast<double>(j - i) * psi(q, sorted[i], weight));
      i = j;
    }
    sum = s.value();
  } else {
    sum = pair_sum(theta, [&](double t) { return psi(q, t, weight); });
  }
  return 2.0 / n * sum + projected_bias(weight, n);
}

double stat_projected(const UnitSample& sample, const WeightSpec& weight) {
  return stat_projected_angles(pairwise_angles(sample), sample.n(), sample.q, weight);
}

double stat_watson(const std::vector<double>& angles) {
  const std::size_t n = angles.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s.add(watson_h(circular_distance(angles[i], angles[j])));
  }
  return 2.0 / n * s.value() + 1.0 / 12.0;
}

double stat_rothman_circle(const std::vector<double>& angles, double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("Rothman t must lie in (0, 1)");
  const std::size_t n = angles.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  const double tm = std::min(t, 1.0 - t);
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      s.add(rothman_h(circular_distance(angles[i], angles[j]), tm));
    }
  }
  return t * (1.0 - t) + 2.0 / n * s.value();
}

double stat_ajne(const UnitSample& sample) {
  const int n = sample.n();
  if (n < 1) throw std::invalid_argument("empty sample");
  return n / 4.0 - pair_sum(pairwise_angles(sample), [](double t) { return t; }) / (n * kPi);
}

double mean_chord(int q) {
  if (q < 1) throw std::domain_error("dimension q must be >= 1");
  // Angle between two uniform points has density proportional to sin^{q-1}.
  auto rule = gauss_legendre(256);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < rule->order(); ++i) {
    const double phi = 0.5 * kPi * (1.0 + rule->nodes[i]);
    const double w = rule->weights[i] * std::pow(std::sin(phi), q - 1);
    num += w * 2.0 * std::sin(0.5 * phi);
    den += w;
  }
  return num / den;
}

double stat_bakshaev(const UnitSample& sample) {
  const int n = sample.n();
  if (n < 1) throw std::invalid_argument("empty sample");
  const double s = pair_sum(pairwise_angles(sample), [](double t) { return 2.0 * std::sin(0.5 * t); });
  return n * mean_chord(sample.q) - 2.0 / n * s;
}

double stat_rayleigh(const UnitSample& sample) {
  const int n = sample.n();
  if (n < 1) throw std::invalid_argument("empty sample");
  double ss = 0.0;
  for (int c = 0; c < sample.dim(); ++c) {
    CompensatedSum s;
    for (int i = 0; i < n; ++i) s.add(sample.row(i)[c]);
    const double m = s.value() / n;
    ss += m * m;
  }
  return sample.dim() * n * ss;
}

double stat_bingham(const UnitSample& sample) {
  const int n = sample.n();
  const int d = sample.dim();
  if (n < 1) throw std::invalid_argument("empty sample");
  double tr = 0.0;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      CompensatedSum s;
      for (int i = 0; i < n; ++i) s.add(sample.row(i)[a] * sample.row(i)[b]);
      const double v = s.value() / n;
      tr += v * v;
    }
  }
  return 0.5 * d * (d + 2) * n * (tr - 1.0 / d);
}

double stat_gine(const UnitSample& sample) {
  const int n = sample.n();
  if (n < 1) throw std::invalid_argument("empty sample");
  const double s = pair_sum(pairwise_angles(sample), [](double t) { return std::sin(t); });
  return 0.5 * n - gine_constant(sample.q) / n * s;
}

double ks_distance(std::vector<double> projections, int q) {
  const std::size_t n = projections.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  std::sort(projections.begin(), projections.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = proj_cdf(q, std::clamp(projections[i], -1.0, 1.0));
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double stat_ccf09(const UnitSample& sample, const std::vector<double>& directions) {
  const int d = sample.dim();
  if (directions.empty() || directions.size() % d != 0) {
    throw std::invalid_argument("ccf09: directions must be k rows of q + 1 coordinates");
  }
  const int k = static_cast<int>(directions.size()) / d;
  const int n = sample.n();
  std::vector<double> proj(n);
  double best = 0.0;
  for (int r = 0; r < k; ++r) {
    const double* g = directions.data() + static_cast<std::size_t>(r) * d;
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int c = 0; c < d; ++c) dot += g[c] * sample.row(i)[c];
      proj[i] = dot;
    }
    best = std::max(best, ks_distance(proj, sample.q));
  }
  return best;
}

double ilrt_semicircle_log(const std::vector<double>& angles, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::domain_error("ilrt kappa must lie in (0, 1)");
  const std::size_t n = angles.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  const double two_pi = 2.0 * kPi;
  std::vector<double> cuts;
  cuts.reserve(2 * n);
  for (double a : angles) {
    for (double s : {-0.5 * kPi, 0.5 * kPi}) {
      double c = std::fmod(a + s, two_pi);
      if (c < 0.0) c += two_pi;
      cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  const double log_hi = std::log((1.0 + 0.5 * kappa) / two_pi);
  const double log_lo = std::log((1.0 - 0.5 * kappa) / two_pi);
  std::vector<double> terms;
  terms.reserve(cuts.size());
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const double a = cuts[j];
    const double b = j + 1 < cuts.size() ? cuts[j + 1] : cuts[0] + two_pi;
    const double len = b - a;
    if (len <= 0.0) continue;
    const double mid = 0.5 * (a + b);
    std::size_t near = 0;
    for (double x : angles) near += std::cos(x - mid) >= 0.0 ? 1 : 0;
    terms.push_back(std::log(len) + near * log_hi + (n - near) * log_lo);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

double ilrt_semicircle(const std::vector<double>& angles, double kappa) {
  return std::exp(ilrt_semicircle_log(angles, kappa));
}

double statistic(const TestSpec& test, const UnitSample& sample,
                 const std::vector<double>& directions) {
  if (!test.supports(sample.q)) {
    throw std::invalid_argument(test.label() + " is not available for q = " +
                                std::to_string(sample.q));
  }
  switch (test.kind) {
    case TestKind::Projected:
      return stat_projected(sample, test.weight);
    case TestKind::Watson:
      return stat_watson(sample.angles());
    case TestKind::RothmanCircle:
      return stat_rothman_circle(sample.angles(), test.param);
    case TestKind::Ajne:
      return stat_ajne(sample);
    case TestKind::Bakshaev:
      return stat_bakshaev(sample);
    case TestKind::Rayleigh:
      return stat_rayleigh(sample);
    case TestKind::Bingham:
      return stat_bingham(sample);
    case TestKind::Gine:
      return stat_gine(sample);
    case TestKind::CCF09:
      return stat_ccf09(sample, directions);
    case TestKind::ILRT:
      return ilrt_semicircle_log(sample.angles(), test.param);
  }
  throw std::invalid_argument("unknown test");
}

std::shared_ptr<const AsymptoticLaw> asymptotic_law(const WeightSpec& weight, int q, int K_max) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const AsymptoticLaw>> laws;
  const std::string key = weight.id() + "|" + std::to_string(q) + "|" + std::to_string(K_max);
  {
    std::lock_guard lock(mutex);
    if (auto it = laws.find(key); it != laws.end()) return it->second;
  }
  auto law = std::make_shared<const AsymptoticLaw>(weight, q, K_max);
  std::lock_guard lock(mutex);
  return laws.emplace(key, std::move(law)).first->second;
}

double asymptotic_pvalue(double stat, const TestSpec& test, int q, const TailQuery& query) {
  if (!test.has_asymptotic(q)) {
    throw std::invalid_argument("no asymptotic law for " + test.label() + " at q = " +
                                std::to_string(q));
  }
  auto law = [&](const WeightSpec& w, double x) {
    return asymptotic_law(w, q, query.K_max)->pvalue(x, query.delta, query.imhof_accuracy);
  };
  switch (test.kind) {
    case TestKind::Projected:
      return law(test.weight, stat);
    case TestKind::Watson:
      return law(WeightSpec::cvm(), 2.0 * stat);
    case TestKind::RothmanCircle:
      return law(WeightSpec::rothman(test.param), stat);
    case TestKind::Ajne:
      return law(WeightSpec::rothman(0.5), stat);
    case TestKind::Bakshaev:
      return law(WeightSpec::cvm(), stat / 8.0);
    case TestKind::Rayleigh:
      return stat <= 0.0 ? 1.0 : chisq_upper_tail(stat, q + 1.0);
    case TestKind::Bingham:
      return stat <= 0.0 ? 1.0 : chisq_upper_tail(stat, 0.5 * (q + 1) * (q + 2) - 1.0);
    default:
      break;
  }
  throw std::invalid_argument("no asymptotic law for " + test.label());
}

Battery::Battery(std::vector<TestSpec> tests, int q, std::vector<double> ccf_directions)
    : tests_(std::move(tests)), q_(q), directions_(std::move(ccf_directions)) {
  tables_.resize(tests_.size());
  for (std::size_t i = 0; i < tests_.size(); ++i) {
    const TestSpec& t = tests_[i];
    if (!t.supports(q)) {
      throw std::invalid_argument(t.label() + " is not available for q = " + std::to_string(q));
    }
    if (t.kind == TestKind::Projected) tables_[i] = std::make_unique<KernelTable>(q, t.weight);
    if (t.kind == TestKind::CCF09 && directions_.empty()) {
      throw std::invalid_argument("CCF09 needs a direction set");
    }
    if (t.kind == TestKind::Bakshaev) chord_ = mean_chord(q);
  }
}

std::vector<double> Battery::evaluate(const UnitSample& sample) const {
  if (sample.q != q_) throw std::invalid_argument("sample dimension does not match battery");
  const int n = sample.n();
  if (n < 1) throw std::invalid_argument("empty sample");
  bool need_pairs = false;
  for (const auto& t : tests_) {
    switch (t.kind) {
      case TestKind::Rayleigh:
      case TestKind::Bingham:
      case TestKind::CCF09:
      case TestKind::ILRT:
        break;
      default:
        need_pairs = true;
    }
  }
  std::vector<double> theta;
  if (need_pairs) theta = pairwise_angles(sample);
  std::vector<double> out(tests_.size());
  for (std::size_t i = 0; i < tests_.size(); ++i) {
    const TestSpec& t = tests_[i];
    switch (t.kind) {
      case TestKind::Projected: {
        const KernelTable& table = *tables_[i];
        out[i] = 2.0 / n * pair_sum(theta, table) + projected_bias(t.weight, n);
        break;
      }
      case TestKind::Watson:
        out[i] = 2.0 / n * pair_sum(theta, watson_h) + 1.0 / 12.0;
        break;
      case TestKind::RothmanCircle: {
        const double tm = std::min(t.param, 1.0 - t.param);
        out[i] = t.param * (1.0 - t.param) +
                 2.0 / n * pair_sum(theta, [tm](double x) { return rothman_h(x, tm); });
        break;
      }
      case TestKind::Ajne:
        out[i] = n / 4.0 - pair_sum(theta, [](double x) { return x; }) / (n * kPi);
        break;
      case TestKind::Bakshaev:
        out[i] = n * chord_ -
                 2.0 / n * pair_sum(theta, [](double x) { return 2.0 * std::sin(0.5 * x); });
        break;
      case TestKind::Gine:
        out[i] = 0.5 * n -
                 gine_constant(q_) / n * pair_sum(theta, [](double x) { return std::sin(x); });
        break;
      case TestKind::Rayleigh:
        out[i] = stat_rayleigh(sample);
        break;
      case TestKind::Bingham:
        out[i] = stat_bingham(sample);
        break;
      case TestKind::CCF09:
        out[i] = stat_ccf09(sample, directions_);
        break;
      case TestKind::ILRT:
        out[i] = ilrt_semicircle_log(sample.angles(), t.param);
        break;
    }
  }
  return out;
}

}  // namespace projunif
