#include "projunif/coeffs.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>

#include "projunif/kernels.hpp"
#include "projunif/projdist.hpp"
#include "projunif/specfun.hpp"

namespace projunif {

namespace {

// Constant in front of (1 - x^2)^q R_{k-1}(x)^2 in a_k^x, where R is the
// Gegenbauer polynomial of order (q+1)/2 normalized to one at x = 1.
double a_prefactor(int k, int q) {
  if (q == 1) return 2.0 / (kPi * kPi);
  const double log_kappa = (q - 1) * std::log(2.0) + 2.0 * std::lgamma(0.5 * (q + 1)) -
                           std::log(kPi) - std::lgamma(q + 1.0);
  return (1.0 + 2.0 * k / (q - 1)) * std::exp(2.0 * log_kappa);
}

// S_k = sum_j v_j R_{k-1}(x_j)^2 for k = 1..K, R of order lambda.
std::vector<double> squared_recurrence_sums(double lambda, const std::vector<double>& x,
                                            const std::vector<double>& v, int K) {
  std::vector<double> sums(K + 1, 0.0);
  if (K < 1) return sums;
  std::vector<double> alpha(K + 1, 0.0), beta(K + 1, 0.0);
  for (int m = 2; m <= K; ++m) {
    alpha[m] = 2.0 * (m + lambda - 1.0) / (m + 2.0 * lambda - 1.0);
    beta[m] = (m - 1.0) / (m + 2.0 * lambda - 1.0);
  }
  constexpr std::size_t B = 8;
  const std::size_t n = x.size();
  for (std::size_t start = 0; start < n; start += B) {
    double xs[B], vs[B], r0[B], r1[B];
    for (std::size_t b = 0; b < B; ++b) {
      const bool live = start + b < n;
      xs[b] = live ? x[start + b] : 0.0;
      vs[b] = live ? v[start + b] : 0.0;
      r0[b] = 1.0;
      r1[b] = xs[b];
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < B; ++b) acc += vs[b];
    sums[1] += acc;
    if (K >= 2) {
      acc = 0.0;
      for (std::size_t b = 0; b < B; ++b) acc += vs[b] * r1[b] * r1[b];
      sums[2] += acc;
    }
    for (int m = 2; m < K; ++m) {
      const double a = alpha[m];
      const double c = beta[m];
      acc = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double r2 = a * xs[b] * r1[b] - c * r0[b];
        r0[b] = r1[b];
        r1[b] = r2;
        acc += vs[b] * r2 * r2;
      }
      sums[m + 1] += acc;
    }
  }
  return sums;
}

double one_minus_sq(double x) { return (1.0 - x) * (1.0 + x); }

double atom_of(const WeightSpec& w) {
  return w.kind == WeightKind::Rothman ? w.t_m() : std::min(w.param, 1.0 - w.param);
}

std::vector<double> atom_sequence(int q, double u, int K) {
  std::vector<double> b(K + 1);
  b[0] = 0.5 * (u * u + (1.0 - u) * (1.0 - u));
  const auto a = a_coeff_sequence(q, proj_quantile(q, 1.0 - u), K);
  for (int k = 1; k <= K; ++k) b[k] = a[k - 1];
  return b;
}

int even_at_least(int n) { return n % 2 == 0 ? n : n + 1; }

std::vector<double> symmetric_generic(const WeightSpec& weight, int q, int K) {
  const bool ad = weight.kind == WeightKind::AD;
  std::vector<double> xs, vs;
  if (q == 1 && ad) {
    // Smooth in the angle phi = acos(x); Gauss-Legendre on [0, pi/2], doubled.
    const int n = std::max(5120, 3 * K + 64);
    const auto rule = gauss_legendre(n);
    for (int j = 0; j < n; ++j) {
      const double phi = 0.25 * kPi * (1.0 + rule->nodes[j]);
      const double u = phi / kPi;
      const double s = std::sin(phi);
      xs.push_back(std::cos(phi));
      vs.push_back(2.0 * 0.25 * kPi * rule->weights[j] * s * s / (kPi * u * (1.0 - u)));
    }
  } else if (q % 2 == 0) {
    // (1 - x^2)^q f_q(x) is a polynomial: Gauss-Legendre in x.
    const int extra = ad ? K / 8 + 64 : 0;
    const int n = even_at_least(std::max(5120, K + extra + 2 * q + 32));
    const auto rule = gauss_legendre(n);
    for (int j = n / 2; j < n; ++j) {
      const double x = rule->nodes[j];
      double v = 2.0 * rule->weights[j] * std::pow(one_minus_sq(x), q) * proj_density(q, x);
      if (ad) v /= proj_cdf(q, x) * proj_cdf(q, -x);
      xs.push_back(x);
      vs.push_back(v);
    }
  } else {
    // Odd q: the density carries a 1/sqrt(1 - x^2) factor; Gauss-Chebyshev.
    const int extra = ad ? K / 8 + 64 : 0;
    const int n = even_at_least(std::max(5120, K + extra + 2 * q + 32));
    const auto rule = gauss_chebyshev(n);
    const double log_norm = proj_log_norm(q);
    for (int j = n / 2; j < n; ++j) {
      const double x = rule.nodes[j];
      const double s2 = one_minus_sq(x);
      double v = 2.0 * rule.weights[j] * std::pow(s2, q) *
                 std::exp(0.5 * (q - 1) * std::log(s2) - log_norm);
      if (ad) v /= proj_cdf(q, x) * proj_cdf(q, -x);
      xs.push_back(x);
      vs.push_back(v);
    }
  }
  const auto sums = squared_recurrence_sums(0.5 * (q + 1), xs, vs, K);
  std::vector<double> b(K + 1);
  b[0] = ad ? -1.0 : 1.0 / 3.0;
  for (int k = 1; k <= K; ++k) b[k] = a_prefactor(k, q) * sums[k];
  return b;
}

std::vector<double> density_generic(const WeightSpec& weight, int q, int K, int cells) {
  auto wt = [&](double u) { return 0.5 * (weight.eval(u) + 1.0 - weight.eval(1.0 - u)); };
  std::vector<double> xs, vs;
  double prev = wt(0.0);
  for (int i = 0; i < cells; ++i) {
    const double next = wt(static_cast<double>(i + 1) / cells);
    const double mass = next - prev;
    prev = next;
    if (mass == 0.0) continue;
    const double x = proj_quantile(q, (i + 0.5) / cells);
    xs.push_back(x);
    vs.push_back(mass * std::pow(one_minus_sq(x), q));
  }
  const auto sums = squared_recurrence_sums(0.5 * (q + 1), xs, vs, K);
  std::vector<double> b(K + 1);
  b[0] = weight_second_moment(weight);
  for (int k = 1; k <= K; ++k) b[k] = a_prefactor(k, q) * sums[k];
  return b;
}

// ---- persistence -----------------------------------------------------------

constexpr char kMagic[4] = {'P', 'J', 'C', 'F'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes, 8);
}

bool get_u64(std::istream& is, std::uint64_t& v) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return true;
}

std::filesystem::path cache_file(const std::string& dir, const WeightSpec& weight, int q) {
  std::string name = weight.id();
  for (char& c : name) {
    if (c == ':' || c == '/' || c == '.') c = '_';
  }
  return std::filesystem::path(dir) / ("coeffs_" + name + "_q" + std::to_string(q) + ".bin");
}

bool load_cached(const std::string& dir, const WeightSpec& weight, int q, int K,
                 std::vector<double>& out) {
  if (dir.empty()) return false;
  std::ifstream is(cache_file(dir, weight, q), std::ios::binary);
  if (!is) return false;
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) return false;
  std::uint64_t version, fq, code, param_bits, fk;
  if (!get_u64(is, version) || version != kFormatVersion) return false;
  if (!get_u64(is, fq) || static_cast<int>(fq) != q) return false;
  if (!get_u64(is, code) || static_cast<int>(code) != weight.code()) return false;
  if (!get_u64(is, param_bits) || std::bit_cast<double>(param_bits) != weight.param) {
    return false;
  }
  if (!get_u64(is, fk) || static_cast<int>(fk) < K) return false;
  out.assign(K + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    std::uint64_t bits;
    if (!get_u64(is, bits)) return false;
    out[k] = std::bit_cast<double>(bits);
  }
  return true;
}

void store_cached(const std::string& dir, const WeightSpec& weight, int q,
                  const std::vector<double>& b) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto target = cache_file(dir, weight, q);
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) return;
    os.write(kMagic, 4);
    put_u64(os, kFormatVersion);
    put_u64(os, static_cast<std::uint64_t>(q));
    put_u64(os, static_cast<std::uint64_t>(weight.code()));
    put_u64(os, std::bit_cast<std::uint64_t>(weight.param));
    put_u64(os, static_cast<std::uint64_t>(b.size() - 1));
    for (double v : b) put_u64(os, std::bit_cast<std::uint64_t>(v));
    if (!os) return;
  }
  std::filesystem::rename(tmp, target, ec);
}

struct CacheState {
  std::shared_mutex mutex;
  std::map<std::string, std::vector<double>> sequences;
  std::string dir;
  bool dir_set = false;
};

CacheState& cache_state() {
  static CacheState state;
  return state;
}

}  // namespace

ChiSqMixture ChiSqMixture::prefix(std::size_t terms) const {
  ChiSqMixture out;
  terms = std::min(terms, w.size());
  out.w.assign(w.begin(), w.begin() + terms);
  out.d.assign(d.begin(), d.begin() + terms);
  return out;
}

double eigen_dim(int k, int q) {
  if (k < 0 || q < 1) throw std::domain_error("eigen_dim: need k >= 0, q >= 1");
  if (k == 0) return 1.0;
  if (q == 1) return 2.0;
  auto log_binom = [](double n, double r) {
    return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
  };
  const double d = std::exp(log_binom(q + k - 2.0, q - 1.0)) +
                   std::exp(log_binom(q + k - 1.0, q - 1.0));
  return d < 1e12 ? std::round(d) : d;
}

double a_coeff(int k, int q, double x) {
  if (k < 0) throw std::domain_error("a_coeff: negative index");
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("a_coeff: |x| > 1");
  if (k == 0) {
    const double f = proj_cdf(q, x);
    return f * f;
  }
  if (q == 1) return (1.0 - chebyshev_t(2 * k, x)) / (kPi * kPi * k * k);
  const double r = gegenbauer_normalized(k - 1, 0.5 * (q + 1), x);
  return a_prefactor(k, q) * std::pow(one_minus_sq(x), q) * r * r;
}

std::vector<double> a_coeff_sequence(int q, double x, int K) {
  const auto sums = squared_recurrence_sums(0.5 * (q + 1), {x},
                                            {std::pow(one_minus_sq(x), q)}, K);
  std::vector<double> out(K);
  for (int k = 1; k <= K; ++k) out[k - 1] = a_prefactor(k, q) * sums[k];
  return out;
}

double b_cvm(int k, int q) {
  if (k < 0) throw std::domain_error("b_cvm: negative index");
  if (k == 0) return 1.0 / 3.0;
  switch (q) {
    case 1:
      return 1.0 / (kPi * kPi * k * k);
    case 2:
      return 1.0 / (2.0 * (2.0 * k + 3.0) * (2.0 * k - 1.0));
    case 3: {
      if (k == 1) return 35.0 / (72.0 * kPi * kPi);
      const double kk = k;
      return (3.0 * kk * kk + 6.0 * kk + 4.0) /
             (2.0 * kPi * kPi * kk * kk * (kk + 1.0) * (kk + 2.0) * (kk + 2.0));
    }
    default:
      break;
  }
  double biggest = 0.0;
  const double h = hyp4f3_unit(k, q, &biggest);
  if (biggest > 1e5 * std::abs(h)) return b_coeff_generic(WeightSpec::cvm(), k, q);
  const double log_pref = 2.0 * std::log(q - 1.0) + std::log(2.0 * k + q - 1.0) +
                          3.0 * std::lgamma(0.5 * (q - 1)) + std::lgamma(1.5 * q) -
                          std::log(8.0 * kPi) - 2.0 * std::log(static_cast<double>(q)) -
                          3.0 * std::lgamma(0.5 * q) - std::lgamma(0.5 * (3 * q + 1));
  return std::exp(log_pref) * h;
}

double b_ad(int k, int q) {
  if (k < 0) throw std::domain_error("b_ad: negative index");
  if (k == 0) return -1.0;
  if (q == 1) return 2.0 * cin(2.0 * kPi * k) / (kPi * kPi * k * k);
  if (q == 2) return 1.0 / (k * (k + 1.0));
  return b_coeff_generic(WeightSpec::ad(), k, q);
}

double b_rothman(int k, int q, double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("Rothman t must lie in (0, 1)");
  const double tm = std::min(t, 1.0 - t);
  if (k == 0) return 0.5 - tm * (1.0 - tm);
  if (q == 1) {
    // reduce k t_m mod 1 first so exact zeros stay exact
    const double s = std::sin(kPi * std::fmod(k * tm, 1.0));
    return 2.0 * s * s / (kPi * kPi * k * k);
  }
  return a_coeff(k, q, proj_quantile(q, tm));
}

std::vector<double> b_coeff_generic_sequence(const WeightSpec& weight, int q, int K, int cells) {
  if (K < 0) throw std::domain_error("b_coeff_generic: negative K");
  if (q < 1) throw std::domain_error("dimension q must be >= 1");
  switch (weight.kind) {
    case WeightKind::Rothman:
    case WeightKind::Dirac:
      return atom_sequence(q, atom_of(weight), K);
    case WeightKind::Density:
      return density_generic(weight, q, K, cells);
    case WeightKind::CvM:
    case WeightKind::AD:
      return symmetric_generic(weight, q, K);
  }
  throw std::invalid_argument("unknown weight");
}

double b_coeff_generic(const WeightSpec& weight, int k, int q) {
  return b_coeff_generic_sequence(weight, q, k).back();
}

CoeffSeq coefficients(const WeightSpec& weight, int q, int K) {
  if (K < 0) throw std::domain_error("coefficients: negative K");
  if (q < 1) throw std::domain_error("dimension q must be >= 1");
  auto& state = cache_state();
  const std::string key = weight.id() + "|" + std::to_string(q);
  CoeffSeq out;
  out.q = q;
  out.weight_id = weight.id();
  {
    std::shared_lock lock(state.mutex);
    auto it = state.sequences.find(key);
    if (it != state.sequences.end() && it->second.size() > static_cast<std::size_t>(K)) {
      out.b.assign(it->second.begin(), it->second.begin() + K + 1);
      return out;
    }
  }
  std::vector<double> b;
  const bool expensive = (weight.kind == WeightKind::CvM && q >= 4) ||
                         (weight.kind == WeightKind::AD && q >= 3);
  const std::string dir = cache_dir();
  if (expensive && load_cached(dir, weight, q, K, b)) {
    // loaded
  } else if (expensive || weight.kind == WeightKind::Density ||
             weight.kind == WeightKind::Dirac || (weight.kind == WeightKind::Rothman && q >= 2)) {
    b = b_coeff_generic_sequence(weight, q, K);
    if (expensive) store_cached(dir, weight, q, b);
  } else {
    b.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
      b[k] = weight.kind == WeightKind::CvM ? b_cvm(k, q)
             : weight.kind == WeightKind::AD ? b_ad(k, q)
                                             : b_rothman(k, q, weight.param);
    }
  }
  {
    std::unique_lock lock(state.mutex);
    auto& slot = state.sequences[key];
    if (slot.size() < b.size()) slot = b;
  }
  out.b = std::move(b);
  return out;
}

ChiSqMixture mixture_weights(const CoeffSeq& coeffs) {
  ChiSqMixture mix;
  for (int k = 1; k <= coeffs.K(); ++k) {
    const double b = coeffs.b[k];
    if (b < 0.0) {
      throw std::domain_error("negative Gegenbauer coefficient at k = " + std::to_string(k) +
                              "; the weight does not define a Sobolev statistic");
    }
    if (b == 0.0) continue;
    const double w = coeffs.q == 1 ? 0.5 * b : b / (1.0 + 2.0 * k / (coeffs.q - 1));
    mix.w.push_back(w);
    mix.d.push_back(eigen_dim(k, coeffs.q));
  }
  return mix;
}

void set_cache_dir(const std::string& dir) {
  auto& state = cache_state();
  std::unique_lock lock(state.mutex);
  state.dir = dir;
  state.dir_set = true;
}

std::string cache_dir() {
  auto& state = cache_state();
  {
    std::shared_lock lock(state.mutex);
    if (state.dir_set) return state.dir;
  }
  const char* env = std::getenv("PROJUNIF_CACHE_DIR");
  return env != nullptr ? std::string(env) : std::string();
}

void clear_coefficient_cache() {
  auto& state = cache_state();
  std::unique_lock lock(state.mutex);
  state.sequences.clear();
}

}  // namespace projunif
