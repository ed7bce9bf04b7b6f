#pragma once

// Monte Carlo engines: exact-n critical values, null rejection audits, power
// studies, and p-values for single samples.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "projunif/chi2mix.hpp"
#include "projunif/sampling.hpp"
#include "projunif/statistics.hpp"

namespace projunif {

inline constexpr std::uint64_t kDefaultSeed = 20201;
// Stream id of the CCF09 direction set; replicate streams use small ids.
inline constexpr std::uint64_t kDirectionStream = 0xD1D1D1D1ull << 32;

struct McConfig {
  int M = 100000;
  int n = 50;
  int q = 1;
  std::vector<double> alphas{0.10, 0.05, 0.01};
  std::uint64_t seed = kDefaultSeed;
  int workers = 0;  // 0: hardware concurrency
  int ccf_directions = 50;
};

/// Calls task(rep) for rep in [0, M) on a thread pool. Results must be written
/// by index so scheduling cannot change them.
void parallel_for(int M, int workers, const std::function<void(int)>& task);

/// Order-statistic quantile with linear interpolation between neighbours.
double empirical_quantile(std::vector<double> values, double p);

/// The fixed CCF09 direction set for (seed, q).
std::vector<double> ccf_direction_set(std::uint64_t seed, int q, int k);

/// Null statistics per test over M uniform samples; out[test][rep].
std::vector<std::vector<double>> null_statistics(const std::vector<TestSpec>& tests,
                                                 const McConfig& config);

struct CriticalValues {
  TestSpec test;
  std::vector<double> alphas;
  std::vector<double> values;
};

std::vector<CriticalValues> mc_critical_values(const std::vector<TestSpec>& tests,
                                               const McConfig& config);

/// Asymptotic critical values of a test from its series law (or its
/// chi-square law).
std::vector<double> asymptotic_critical_values(const TestSpec& test, int q,
                                               const std::vector<double>& alphas,
                                               const TailQuery& query = {});

struct AuditRow {
  TestSpec test;
  double alpha = 0.0;
  double critical = 0.0;
  double rate = 0.0;
  double stderr_ = 0.0;
  bool within_99 = false;  // inside the normal 99% interval around alpha
};

/// Fraction of M null replicates exceeding the asymptotic critical values.
std::vector<AuditRow> null_rejection_audit(const std::vector<TestSpec>& tests,
                                           const McConfig& config, const TailQuery& query = {});

struct Dgp {
  std::string name;  // table label
  double kappa = 0.0;
  AlternativeSpec spec;
};

struct PowerConfig {
  std::vector<Dgp> dgps;
  std::vector<TestSpec> tests;
  int q = 1;
  int n = 100;
  int M = 10000;       // replicates per DGP
  int M_null = 10000;  // replicates for the exact-n critical values
  double alpha = 0.05;
  std::uint64_t seed = kDefaultSeed;
  int workers = 0;
  int ccf_directions = 50;
};

struct PowerCell {
  std::string dgp;
  double kappa = 0.0;
  TestSpec test;
  double critical = 0.0;
  double rate = 0.0;
  double stderr_ = 0.0;
  bool best = false;  // not significantly below the row maximum (McNemar, 5%)
  std::vector<std::uint8_t> decisions;
};

struct PowerTable {
  PowerConfig config;
  std::vector<PowerCell> cells;  // row-major: dgp, then test

  const PowerCell& at(const std::string& dgp, const std::string& test_label) const;
};

PowerTable power_study(const PowerConfig& config);

/// Exact one-sided McNemar p-value for "a rejects more often than b".
double mcnemar_one_sided(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

enum class PMethod { None, Asymptotic, MonteCarlo };

struct PValueMode {
  PMethod method = PMethod::Asymptotic;
  int M = 10000;
  std::uint64_t seed = kDefaultSeed;
  TailQuery query;
};

struct TestOutcome {
  TestSpec test;
  double statistic = 0.0;
  std::optional<double> p_value;
  PMethod method = PMethod::None;
  int q = 1;
  int n = 0;
  int M = 0;
  std::uint64_t seed = 0;
  TailQuery query;
};

const char* method_name(PMethod m);

/// Statistic plus p-value; MC p-values are (1 + #{T* >= T}) / (M + 1).
TestOutcome run_test(const UnitSample& sample, const TestSpec& test, const PValueMode& mode);

/// CSV with one row per (test, dgp, q, n, kappa, alpha, rate, stderr, M, seed).
std::string power_csv(const PowerTable& table);
std::string power_json(const PowerTable& table);
std::string audit_csv(const std::vector<AuditRow>& rows, const McConfig& config);

}  // namespace projunif
