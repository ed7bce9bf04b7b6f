// Acceptance checks. Prints one PASS/FAIL line per criterion, with detail lines
// indented above it. Criteria numbers given as arguments select a subset.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "projunif/chi2mix.hpp"
#include "projunif/coeffs.hpp"
#include "projunif/harness.hpp"
#include "projunif/kernels.hpp"
#include "projunif/sampling.hpp"
#include "projunif/specfun.hpp"
#include "projunif/statistics.hpp"

using namespace projunif;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
};

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::printf("    ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  va_end(ap);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const WeightSpec kRt = WeightSpec::rothman(1.0 / 3);

std::vector<std::pair<std::string, WeightSpec>> three_weights() {
  return {{"CvM", WeightSpec::cvm()}, {"AD", WeightSpec::ad()}, {"Rt", kRt}};
}

// 1 -------------------------------------------------------------------------

Outcome asymptotic_critical_values_check() {
  struct Row {
    const char* name;
    WeightSpec w;
    int q;
    double alpha, expected;
  };
  const std::vector<Row> rows{{"CvM", WeightSpec::cvm(), 1, 0.10, 0.3035},
                              {"CvM", WeightSpec::cvm(), 1, 0.05, 0.3738},
                              {"CvM", WeightSpec::cvm(), 1, 0.01, 0.5368},
                              {"CvM", WeightSpec::cvm(), 10, 0.05, 0.2414},
                              {"AD", WeightSpec::ad(), 2, 0.05, 1.8227},
                              {"Rt", kRt, 3, 0.01, 0.5589}};
  Outcome o;
  double worst = 0;
  for (const auto& r : rows) {
    const double v = mixture_quantile(r.w, r.q, r.alpha);
    const double err = std::abs(v - r.expected);
    worst = std::max(worst, err);
    o.pass = o.pass && err <= 1e-3;
    detail("%-3s q=%-2d alpha=%.2f  %.6f  expected %.4f  |diff| %.2e", r.name, r.q, r.alpha, v,
           r.expected, err);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |diff| %.2e (tol 1e-3)", worst);
  o.summary = buf;
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome truncation_check() {
  Outcome o;
  double worst3 = 0, worst4 = 0, worst5 = 0;
  for (int q : {1, 2, 3, 10})
    for (const auto& [name, w] : three_weights()) {
      TailQuery ref;
      for (double a : {0.10, 0.05, 0.01}) {
        const double x = mixture_quantile(w, q, a, ref);
        const double p_ref = series_pvalue(w, q, x, ref);
        auto at = [&](int K) {
          TailQuery t = ref;
          t.K_max = K;
          return std::abs(series_pvalue(w, q, x, t) - p_ref);
        };
        const double d3 = at(1000), d4 = at(10000), d5 = at(50000);
        worst3 = std::max(worst3, d3);
        worst4 = std::max(worst4, d4);
        worst5 = std::max(worst5, d5);
        detail("%-3s q=%-2d p=%.4f  K=1e3 %.2e  K=1e4 %.2e  K=5e4 %.2e", name.c_str(), q, p_ref,
               d3, d4, d5);
      }
    }
  o.pass = worst3 <= 1e-2 && worst4 <= 1e-3 && worst5 == 0.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max |p_K - p_ref|: K=1e3 %.2e (1e-2), K=1e4 %.2e (1e-3), K=5e4 %.1e (0)",
                worst3, worst4, worst5);
  o.summary = buf;
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome exact_n_check() {
  Outcome o;
  McConfig cfg;
  cfg.M = 100000;
  cfg.n = 50;
  cfg.q = 1;
  cfg.alphas = {0.05};
  const double cvm = mc_critical_values({TestSpec::projected(WeightSpec::cvm())}, cfg)[0].values[0];
  cfg.q = 10;
  cfg.alphas = {0.10};
  const double ad = mc_critical_values({TestSpec::projected(WeightSpec::ad())}, cfg)[0].values[0];
  detail("CvM q=1  n=50 alpha=0.05  %.4f  expected 0.3713 +- 0.004", cvm);
  detail("AD  q=10 n=50 alpha=0.10  %.4f  expected 1.2780 +- 0.006", ad);
  o.pass = std::abs(cvm - 0.3713) <= 0.004 && std::abs(ad - 1.2780) <= 0.006;
  char buf[96];
  std::snprintf(buf, sizeof buf, "CvM %.4f (0.3713), AD %.4f (1.2780), M=1e5", cvm, ad);
  o.summary = buf;
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome null_audit_check() {
  Outcome o;
  int cells = 0, inside = 0;
  double cvm_q1_rate = -1;
  std::vector<TestSpec> tests;
  for (const auto& [name, w] : three_weights()) tests.push_back(TestSpec::projected(w));
  for (int q : {1, 2, 3, 10}) {
    McConfig cfg;
    cfg.M = 100000;
    cfg.n = 200;
    cfg.q = q;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& r : null_rejection_audit(tests, cfg)) {
      ++cells;
      inside += r.within_99;
      if (q == 1 && r.test.weight.kind == WeightKind::CvM && r.alpha == 0.05) cvm_q1_rate = r.rate;
      detail("%-3s q=%-2d alpha=%.2f  rate %.4f  (99%% CI half-width %.4f)%s", r.test.label().c_str(),
             q, r.alpha, r.rate, 2.5758 * std::sqrt(r.alpha * (1 - r.alpha) / cfg.M),
             r.within_99 ? "" : "  OUTSIDE");
    }
    detail("q=%d done in %.0f s", q, seconds_since(t0));
  }
  const double half = 2.5758 * std::sqrt(0.0497 * (1 - 0.0497) / 100000);
  const bool table_cell = std::abs(cvm_q1_rate - 0.0497) <= half;
  detail("CvM q=1 alpha=0.05 rate %.4f vs 0.0497 +- %.4f", cvm_q1_rate, half);
  o.pass = table_cell && inside == cells;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/%d cells inside 99%% CI; CvM q=1 rate %.4f (0.0497)", inside,
                cells, cvm_q1_rate);
  o.summary = buf;
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome identities_check() {
  double bak = 0, ajne = 0, watson = 0;
  for (int r = 0; r < 100; ++r) {
    const int n = 10 + r;
    RngStream rng(5000 + r, 0);
    const auto s2 = sample_uniform(n, 2, rng);
    bak = std::max(bak, std::abs(stat_projected(s2, WeightSpec::cvm()) - stat_bakshaev(s2) / 8));
    for (int q : {1, 2, 3, 10}) {
      const auto s = sample_uniform(n, q, rng);
      ajne = std::max(ajne, std::abs(stat_projected(s, WeightSpec::rothman(0.5)) - stat_ajne(s)));
    }
    const auto s1 = sample_uniform(n, 1, rng);
    watson = std::max(watson, std::abs(stat_projected(s1, WeightSpec::cvm()) - 2 * stat_watson(s1.angles())));
  }
  detail("CvM(q=2) - Bakshaev/8           max |diff| %.2e", bak);
  detail("Rt(1/2) - Ajne, q in {1,2,3,10} max |diff| %.2e (slope 1, intercept 0)", ajne);
  detail("CvM(q=1) - 2 Watson             max |diff| %.2e (factor 2)", watson);
  Outcome o;
  o.pass = bak <= 1e-10 && ajne <= 1e-10 && watson <= 1e-10;
  char buf[112];
  std::snprintf(buf, sizeof buf, "max |diff| %.1e / %.1e / %.1e over 100 samples (tol 1e-10)", bak, ajne,
                watson);
  o.summary = buf;
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome oracle_check() {
  double psi_err = 0, b_err = 0, a_err = 0;
  // On the circle: CvM through the uniform density weight, Rothman through the
  // cap intersection, AD as an integral of atom kernels against 1 / (u (1 - u)).
  const auto uniform = WeightSpec::density([](double u) { return u; }, "uniform");
  const auto gl = gauss_legendre(200);
  auto ad_circle = [&](double th) {
    const double a = std::min(0.5, th / (2 * kPi));
    auto f = [&](double u) {
      return (psi_generic(1, th, WeightSpec::dirac(u)) - 0.5) / (u * (1 - u));
    };
    const double left = a > 0 ? gl->integrate(f, 0.0, a) : 0.0;
    const double right = a < 0.5 ? gl->integrate(f, a, 0.5) : 0.0;
    return 2 * (left + right);
  };
  for (int i = 0; i < 50; ++i) {
    const double th = kPi * i / 49.0;
    psi_err = std::max(psi_err, std::abs(psi_cvm(1, th) - psi_generic(1, th, uniform)));
    psi_err = std::max(psi_err, std::abs(psi_ad(1, th) - ad_circle(th)));
    psi_err = std::max(psi_err, std::abs(psi_rothman(1, th, 1.0 / 3) - psi_generic(1, th, kRt)));
  }
  for (int q : {1, 2, 3}) {
    for (int i = 0; q > 1 && i < 50; ++i) {
      const double th = kPi * i / 49.0;
      psi_err = std::max(psi_err, std::abs(psi_cvm(q, th) - psi_cvm_integral(q, th)));
      psi_err = std::max(psi_err, std::abs(psi_ad(q, th) - psi_ad_integral(q, th)));
      psi_err = std::max(psi_err, std::abs(psi_rothman(q, th, 1.0 / 3) - psi_rothman_integral(q, th, 1.0 / 3)));
    }
    const auto cvm = b_coeff_generic_sequence(WeightSpec::cvm(), q, 20);
    const auto ad = b_coeff_generic_sequence(WeightSpec::ad(), q, 20);
    const auto rt = b_coeff_generic_sequence(kRt, q, 20);
    for (int k = 0; k <= 20; ++k) {
      b_err = std::max(b_err, std::abs(cvm[k] - b_cvm(k, q)));
      b_err = std::max(b_err, std::abs(ad[k] - b_ad(k, q)));
      b_err = std::max(b_err, std::abs(rt[k] - b_rothman(k, q, 1.0 / 3)));
    }
  }
  const int K = 500;
  for (double x : {-0.8, -0.5, 0.0, 0.3, 0.6, 0.9}) {
    const auto a = a_coeff_sequence(2, x, K);
    for (int i = 0; i < 20; ++i) {
      const double th = kPi * (i + 0.5) / 20;
      double s = a_coeff(0, 2, x);
      for (int k = 1; k <= K; ++k) s += a[k - 1] * sphere_basis(k, 2, std::cos(th));
      a_err = std::max(a_err, std::abs(s - cap_intersection(2, th, x)));
    }
  }
  detail("psi closed form vs quadrature, q<=3, 50 angles: max |diff| %.2e", psi_err);
  detail("b_k closed form vs quadrature, q<=3, k<=20:     max |diff| %.2e", b_err);
  detail("cap intersection from a_k, K=500, q=2:          max |diff| %.2e", a_err);
  Outcome o;
  o.pass = psi_err <= 1e-7 && b_err <= 1e-7 && a_err <= 1e-4;
  char buf[112];
  std::snprintf(buf, sizeof buf, "psi %.1e, b %.1e (tol 1e-7); a_k rebuild %.1e (tol 1e-4)", psi_err,
                b_err, a_err);
  o.summary = buf;
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome single_observation_check() {
  double err = 0;
  for (int q : {1, 2, 3, 10}) {
    RngStream rng(77, q);
    const auto s = sample_uniform(1, q, rng);
    err = std::max(err, std::abs(stat_projected(s, WeightSpec::cvm()) - 1.0 / 6));
    err = std::max(err, std::abs(stat_projected(s, WeightSpec::ad()) - 1.0));
    for (double t : {0.1, 0.25, 1.0 / 3, 0.5, 0.8})
      err = std::max(err, std::abs(stat_projected(s, WeightSpec::rothman(t)) - t * (1 - t)));
  }
  detail("n=1: CvM 1/6, AD 1, Rt t(1-t), q in {1,2,3,10}: max |diff| %.2e", err);
  Outcome o;
  o.pass = err <= 4 * std::numeric_limits<double>::epsilon();
  char buf[64];
  std::snprintf(buf, sizeof buf, "max |diff| %.1e", err);
  o.summary = buf;
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome power_check() {
  PowerConfig cfg;
  cfg.q = 1;
  cfg.n = 100;
  cfg.M = 10000;
  cfg.M_null = 10000;
  cfg.alpha = 0.05;
  const double kappa = 0.5;
  const std::vector<std::pair<std::string, std::string>> dgps{
      {"cvm", "CvM"}, {"ad", "AD"}, {"rt", "Rt"}, {"vmf", "vMF"}, {"sc", "SC"}, {"wat", "W"}};
  for (const auto& [name, label] : dgps) cfg.dgps.push_back({label, kappa, AlternativeSpec::preset(name, kappa)});
  for (const char* t : {"rayleigh", "bingham", "ajne", "gine", "ccf09", "bakshaev", "cvm", "ad", "rt"})
    cfg.tests.push_back(parse_test(t));
  const auto t0 = std::chrono::steady_clock::now();
  const PowerTable table = power_study(cfg);

  std::string head = "DGP ";
  for (const auto& t : cfg.tests) {
    char h[16];
    std::snprintf(h, sizeof h, " %8s", t.label().c_str());
    head += h;
  }
  detail("%s", head.c_str());
  for (const auto& d : cfg.dgps) {
    std::string line = d.name;
    line.resize(4, ' ');
    for (const auto& t : cfg.tests) {
      const auto& c = table.at(d.name, t.label());
      char cell[16];
      std::snprintf(cell, sizeof cell, " %7.4f%c", c.rate, c.best ? '*' : ' ');
      line += cell;
    }
    detail("%s", line.c_str());
  }
  detail("power study %.0f s", seconds_since(t0));

  const auto& ray_v = table.at("vMF", "Rayleigh");
  const auto& cvm_v = table.at("vMF", "CvM");
  const auto& bing_w = table.at("W", "Bingham");
  const auto& ad_w = table.at("W", "AD");
  const auto& cvm_w = table.at("W", "CvM");
  const auto& rt_w = table.at("W", "Rt");
  const bool v1 = std::abs(ray_v.rate - 0.8867) <= 0.02;
  const bool v2 = std::abs(bing_w.rate - 0.9785) <= 0.01;
  const bool v3 = std::abs(ad_w.rate - 0.6396) <= 0.025;
  const double p_bing_ad = mcnemar_one_sided(bing_w.decisions, ad_w.decisions);
  const double p_ad_cvm = mcnemar_one_sided(ad_w.decisions, cvm_w.decisions);
  // CvM ~ Rt: the 95% interval of the paired difference lies inside +-0.02.
  long only_cvm = 0, only_rt = 0;
  for (std::size_t r = 0; r < cvm_w.decisions.size(); ++r) {
    only_cvm += cvm_w.decisions[r] && !rt_w.decisions[r];
    only_rt += rt_w.decisions[r] && !cvm_w.decisions[r];
  }
  const double Md = static_cast<double>(cvm_w.decisions.size());
  const double diff = (only_rt - only_cvm) / Md;
  const double diff_se = std::sqrt(((only_rt + only_cvm) / Md - diff * diff) / Md);
  const double p_cvm_ray = mcnemar_one_sided(cvm_v.decisions, ray_v.decisions);
  const bool o1 = p_bing_ad < 0.05 && bing_w.rate - ad_w.rate > 0.2;
  const bool o2 = p_ad_cvm < 0.05;
  const bool o3 = std::abs(diff) + 1.96 * diff_se <= 0.02;
  const bool o4 = p_cvm_ray >= 0.05;
  detail("vMF Rayleigh %.4f (0.8867 +- 0.02) %s", ray_v.rate, v1 ? "ok" : "OFF");
  detail("W   Bingham  %.4f (0.9785 +- 0.01) %s", bing_w.rate, v2 ? "ok" : "OFF");
  detail("W   AD       %.4f (0.6396 +- 0.025) %s", ad_w.rate, v3 ? "ok" : "OFF");
  detail("W   Bingham >> AD: McNemar p %.2e %s", p_bing_ad, o1 ? "ok" : "FAILS");
  detail("W   AD > CvM:      McNemar p %.2e %s", p_ad_cvm, o2 ? "ok" : "FAILS");
  detail("W   CvM ~ Rt:      paired Rt - CvM %.4f +- %.4f (95%%), inside +-0.02: %s", diff,
         1.96 * diff_se, o3 ? "ok" : "FAILS");
  detail("vMF Rayleigh >~ CvM: McNemar p(CvM > Rayleigh) %.3f %s", p_cvm_ray, o4 ? "ok" : "FAILS");
  Outcome o;
  o.pass = v1 && v2 && v3 && o1 && o2 && o3 && o4;
  char buf[128];
  std::snprintf(buf, sizeof buf, "Rayleigh|vMF %.4f, Bingham|W %.4f, AD|W %.4f; orderings %s", ray_v.rate,
                bing_w.rate, ad_w.rate, (o1 && o2 && o3 && o4) ? "hold" : "broken");
  o.summary = buf;
  return o;
}

// 9 -------------------------------------------------------------------------

Outcome imhof_check() {
  double worst = 0;
  for (int q : {1, 2, 3, 10})
    for (const auto& [name, w] : three_weights()) {
      AsymptoticLaw law(w, q);
      double row = 0;
      for (double a : {0.01, 0.02, 0.05, 0.10, 0.15, 0.20}) {
        const double x = law.quantile(a);
        row = std::max(row, std::abs(law.hbe_pvalue(x, law.K_max()) - a));
      }
      worst = std::max(worst, row);
      detail("%-3s q=%-2d max |HBE - Imhof| over tails 0.01..0.20: %.2e", name.c_str(), q, row);
    }
  bool sim_ok = true;
  double worst_z = 0;
  const int N = 1000000;
  for (int q : {1, 2, 3, 10})
    for (const auto& [name, w] : three_weights()) {
      const auto mix = mixture_weights(coefficients(w, q, 20));
      const double x = mixture_quantile(w, q, 0.05);
      std::mt19937_64 eng(9000 + q);
      std::vector<std::chi_squared_distribution<double>> dists;
      for (double d : mix.d) dists.emplace_back(d);
      long hits = 0;
      for (int r = 0; r < N; ++r) {
        double s = 0;
        for (std::size_t k = 0; k < mix.size(); ++k) s += mix.w[k] * dists[k](eng);
        hits += s > x;
      }
      const double p = static_cast<double>(hits) / N;
      const double se = std::sqrt(p * (1 - p) / N);
      const double imhof = imhof_tail(mix, x);
      const double z = std::abs(imhof - p) / se;
      worst_z = std::max(worst_z, z);
      sim_ok = sim_ok && z <= 3;
      detail("%-3s q=%-2d 20-term mixture at x=%.4f: Imhof %.5f, simulated %.5f (%.2f SE)", name.c_str(), q,
             x, imhof, p, z);
    }
  Outcome o;
  o.pass = worst <= 5e-3 && sim_ok;
  char buf[112];
  std::snprintf(buf, sizeof buf, "max |HBE - Imhof| %.2e (tol 5e-3); max simulation gap %.2f SE (tol 3)", worst,
                worst_z);
  o.summary = buf;
  return o;
}

// 10 ------------------------------------------------------------------------

Outcome performance_check() {
  auto time_of = [](int n) {
    RngStream rng(31, n);
    const auto s = sample_uniform(n, 3, rng);
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      volatile double v = stat_projected(s, WeightSpec::cvm());
      (void)v;
      best = std::min(best, seconds_since(t0));
    }
    return best;
  };
  time_of(64);
  const double ratio = time_of(2000) / time_of(500);
  McConfig cfg;
  cfg.M = 100000;
  cfg.n = 50;
  cfg.q = 2;
  const auto t0 = std::chrono::steady_clock::now();
  mc_critical_values({TestSpec::projected(WeightSpec::cvm())}, cfg);
  const double elapsed = seconds_since(t0);
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  detail("time(n=2000) / time(n=500) = %.1f (quadratic: 16, accepted 8..32)", ratio);
  detail("null calibration M=1e5, n=50, q=2, CvM: %.1f s on %u core(s)", elapsed, cores);
  Outcome o;
  o.pass = ratio > 8 && ratio < 32 && elapsed < 300;
  char buf[96];
  std::snprintf(buf, sizeof buf, "timing ratio %.1f; calibration %.1f s (limit 300 s)", ratio, elapsed);
  o.summary = buf;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"asymptotic critical values", asymptotic_critical_values_check},
      {"truncation accuracy", truncation_check},
      {"exact-n critical values", exact_n_check},
      {"null rejection audit", null_audit_check},
      {"exact identities", identities_check},
      {"closed forms vs quadrature", oracle_check},
      {"single observation values", single_observation_check},
      {"power study", power_check},
      {"Imhof vs HBE and simulation", imhof_check},
      {"performance", performance_check}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s  %2d  %-28s %s  [%.0f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.summary.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
