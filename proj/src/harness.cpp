#include "projunif/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "projunif/json_text.hpp"
#include "projunif/specfun.hpp"

namespace projunif {

namespace {

bool needs_directions(const std::vector<TestSpec>& tests) {
  return std::any_of(tests.begin(), tests.end(),
                     [](const TestSpec& t) { return t.kind == TestKind::CCF09; });
}

int direction_count(const std::vector<TestSpec>& tests, int fallback) {
  for (const auto& t : tests) {
    if (t.kind == TestKind::CCF09) return static_cast<int>(t.param);
  }
  return fallback;
}

Battery make_battery(const std::vector<TestSpec>& tests, int q, std::uint64_t seed, int k) {
  std::vector<double> dirs;
  if (needs_directions(tests)) dirs = ccf_direction_set(seed, q, direction_count(tests, k));
  return Battery(tests, q, std::move(dirs));
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void parallel_for(int M, int workers, const std::function<void(int)>& task) {
  if (M <= 0) return;
  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::clamp(w, 1, M);
  if (w == 1) {
    for (int i = 0; i < M; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  constexpr int chunk = 64;
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const int start = next.fetch_add(chunk);
          if (start >= M || failed.load()) return;
          const int stop = std::min(M, start + chunk);
          for (int i = start; i < stop; ++i) task(i);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed = true;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

std::vector<double> ccf_direction_set(std::uint64_t seed, int q, int k) {
  RngStream rng(seed, kDirectionStream + static_cast<std::uint64_t>(q));
  return random_directions(k, q, rng);
}

std::vector<std::vector<double>> null_statistics(const std::vector<TestSpec>& tests,
                                                 const McConfig& config) {
  if (config.M < 1) throw std::invalid_argument("M must be >= 1");
  const Battery battery = make_battery(tests, config.q, config.seed, config.ccf_directions);
  std::vector<std::vector<double>> out(tests.size(), std::vector<double>(config.M));
  parallel_for(config.M, config.workers, [&](int rep) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
    const auto stats = battery.evaluate(sample_uniform(config.n, config.q, rng));
    for (std::size_t t = 0; t < tests.size(); ++t) out[t][rep] = stats[t];
  });
  return out;
}

std::vector<CriticalValues> mc_critical_values(const std::vector<TestSpec>& tests,
                                               const McConfig& config) {
  const auto stats = null_statistics(tests, config);
  std::vector<CriticalValues> out;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    CriticalValues cv{tests[t], config.alphas, {}};
    for (double a : config.alphas) cv.values.push_back(empirical_quantile(stats[t], 1.0 - a));
    out.push_back(std::move(cv));
  }
  return out;
}

std::vector<double> asymptotic_critical_values(const TestSpec& test, int q,
                                               const std::vector<double>& alphas,
                                               const TailQuery& query) {
  std::vector<double> out;
  auto law_quantile = [&](const WeightSpec& w, double a) {
    return asymptotic_law(w, q, query.K_max)->quantile(a, query.delta, query.imhof_accuracy);
  };
  for (double a : alphas) {
    if (!test.has_asymptotic(q)) {
      throw std::invalid_argument("no asymptotic law for " + test.label());
    }
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
    if (a == 0.0) {
      out.push_back(INFINITY);
      continue;
    }
    double v = 0.0;
    switch (test.kind) {
      case TestKind::Projected:
        v = law_quantile(test.weight, a);
        break;
      case TestKind::Watson:
        v = 0.5 * law_quantile(WeightSpec::cvm(), a);
        break;
      case TestKind::RothmanCircle:
        v = law_quantile(WeightSpec::rothman(test.param), a);
        break;
      case TestKind::Ajne:
        v = law_quantile(WeightSpec::rothman(0.5), a);
        break;
      case TestKind::Bakshaev:
        v = 8.0 * law_quantile(WeightSpec::cvm(), a);
        break;
      case TestKind::Rayleigh:
      case TestKind::Bingham: {
        const double dof = test.kind == TestKind::Rayleigh ? q + 1.0 : 0.5 * (q + 1) * (q + 2) - 1.0;
        double lo = 0.0, hi = dof + 10.0 * std::sqrt(2.0 * dof) + 50.0;
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (lo + hi);
          (chisq_upper_tail(mid, dof) > a ? lo : hi) = mid;
        }
        v = 0.5 * (lo + hi);
        break;
      }
      default:
        throw std::invalid_argument("no asymptotic law for " + test.label());
    }
    out.push_back(v);
  }
  return out;
}

std::vector<AuditRow> null_rejection_audit(const std::vector<TestSpec>& tests,
                                           const McConfig& config, const TailQuery& query) {
  std::vector<std::vector<double>> critical;
  for (const auto& t : tests) {
    critical.push_back(asymptotic_critical_values(t, config.q, config.alphas, query));
  }
  const auto stats = null_statistics(tests, config);
  std::vector<AuditRow> rows;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
      const double c = critical[t][a];
      const auto hits = std::count_if(stats[t].begin(), stats[t].end(), [c](double s) { return s > c; });
      AuditRow row;
      row.test = tests[t];
      row.alpha = config.alphas[a];
      row.critical = c;
      row.rate = static_cast<double>(hits) / config.M;
      row.stderr_ = std::sqrt(row.rate * (1.0 - row.rate) / config.M);
      const double half = 2.5758293035489004 * std::sqrt(row.alpha * (1.0 - row.alpha) / config.M);
      row.within_99 = std::abs(row.rate - row.alpha) <= half;
      rows.push_back(row);
    }
  }
  return rows;
}

const PowerCell& PowerTable::at(const std::string& dgp, const std::string& test_label) const {
  for (const auto& c : cells) {
    if (c.dgp == dgp && c.test.label() == test_label) return c;
  }
  throw std::out_of_range("no power cell for " + dgp + " / " + test_label);
}

double mcnemar_one_sided(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mcnemar: decision vectors differ in length");
  long n10 = 0, n01 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) ++n10;
    if (!a[i] && b[i]) ++n01;
  }
  const long m = n10 + n01;
  if (m == 0) return 1.0;
  // P[Bin(m, 1/2) >= n10]
  CompensatedSum s;
  for (long j = n10; j <= m; ++j) {
    s.add(std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) -
                   m * std::log(2.0)));
  }
  return std::min(1.0, s.value());
}

PowerTable power_study(const PowerConfig& config) {
  PowerTable table;
  table.config = config;
  McConfig null_cfg;
  null_cfg.M = config.M_null;
  null_cfg.n = config.n;
  null_cfg.q = config.q;
  null_cfg.alphas = {config.alpha};
  null_cfg.seed = config.seed;
  null_cfg.workers = config.workers;
  null_cfg.ccf_directions = config.ccf_directions;
  const auto cvs = mc_critical_values(config.tests, null_cfg);
  const Battery battery = make_battery(config.tests, config.q, config.seed, config.ccf_directions);
  const std::size_t T = config.tests.size();

  for (std::size_t g = 0; g < config.dgps.size(); ++g) {
    const Dgp& dgp = config.dgps[g];
    const AlternativeSampler sampler(dgp.spec, config.q);
    std::vector<std::uint8_t> decisions(T * config.M);
    parallel_for(config.M, config.workers, [&](int rep) {
      // Streams disjoint from the null calibration ones.
      RngStream rng(config.seed, ((static_cast<std::uint64_t>(g) + 1) << 32) + rep);
      const auto stats = battery.evaluate(sampler.draw(config.n, rng));
      for (std::size_t t = 0; t < T; ++t) {
        decisions[t * config.M + rep] = stats[t] > cvs[t].values[0] ? 1 : 0;
      }
    });
    std::vector<PowerCell> row;
    for (std::size_t t = 0; t < T; ++t) {
      PowerCell cell;
      cell.dgp = dgp.name;
      cell.kappa = dgp.kappa;
      cell.test = config.tests[t];
      cell.critical = cvs[t].values[0];
      cell.decisions.assign(decisions.begin() + t * config.M, decisions.begin() + (t + 1) * config.M);
      const long hits = std::count(cell.decisions.begin(), cell.decisions.end(), 1);
      cell.rate = static_cast<double>(hits) / config.M;
      cell.stderr_ = std::sqrt(cell.rate * (1.0 - cell.rate) / config.M);
      row.push_back(std::move(cell));
    }
    std::size_t top = 0;
    for (std::size_t t = 1; t < T; ++t) {
      if (row[t].rate > row[top].rate) top = t;
    }
    for (std::size_t t = 0; t < T; ++t) {
      row[t].best = t == top || mcnemar_one_sided(row[top].decisions, row[t].decisions) >= 0.05;
    }
    for (auto& c : row) table.cells.push_back(std::move(c));
  }
  return table;
}

const char* method_name(PMethod m) {
  switch (m) {
    case PMethod::None:
      return "none";
    case PMethod::Asymptotic:
      return "asymptotic";
    case PMethod::MonteCarlo:
      return "monte_carlo";
  }
  return "none";
}

TestOutcome run_test(const UnitSample& sample, const TestSpec& test, const PValueMode& mode) {
  TestOutcome out;
  out.test = test;
  out.q = sample.q;
  out.n = sample.n();
  out.method = mode.method;
  out.query = mode.query;
  std::vector<double> dirs;
  if (test.kind == TestKind::CCF09) {
    dirs = ccf_direction_set(mode.seed, sample.q, static_cast<int>(test.param));
  }
  out.statistic = statistic(test, sample, dirs);
  switch (mode.method) {
    case PMethod::None:
      break;
    case PMethod::Asymptotic:
      if (sample.n() < 2) throw std::invalid_argument("sample too small for asymptotic calibration");
      out.p_value = asymptotic_pvalue(out.statistic, test, sample.q, mode.query);
      break;
    case PMethod::MonteCarlo: {
      McConfig cfg;
      cfg.M = mode.M;
      cfg.n = sample.n();
      cfg.q = sample.q;
      cfg.seed = mode.seed;
      cfg.ccf_directions = dirs.empty() ? 50 : static_cast<int>(test.param);
      // Same computation path as the replicates, so ties compare exactly.
      const Battery battery = make_battery({test}, sample.q, mode.seed, cfg.ccf_directions);
      out.statistic = battery.evaluate(sample)[0];
      const auto null = null_statistics({test}, cfg)[0];
      const long ge = std::count_if(null.begin(), null.end(),
                                    [&](double s) { return s >= out.statistic; });
      out.p_value = (1.0 + ge) / (mode.M + 1.0);
      out.M = mode.M;
      out.seed = mode.seed;
      break;
    }
  }
  return out;
}

std::string power_csv(const PowerTable& table) {
  std::ostringstream os;
  os << "test,dgp,q,n,kappa,alpha,rate,stderr,M,seed\n";
  for (const auto& c : table.cells) {
    os << c.test.id() << ',' << c.dgp << ',' << table.config.q << ',' << table.config.n << ','
       << fmt17(c.kappa) << ',' << fmt17(table.config.alpha) << ',' << fmt17(c.rate) << ','
       << fmt17(c.stderr_) << ',' << table.config.M << ',' << table.config.seed << '\n';
  }
  return os.str();
}

std::string power_json(const PowerTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : table.cells) {
    rows.push_back({{"test", c.test.id()},
                    {"label", c.test.label()},
                    {"dgp", c.dgp},
                    {"q", table.config.q},
                    {"n", table.config.n},
                    {"kappa", c.kappa},
                    {"alpha", table.config.alpha},
                    {"critical_value", c.critical},
                    {"rate", c.rate},
                    {"stderr", c.stderr_},
                    {"best", c.best},
                    {"M", table.config.M},
                    {"seed", table.config.seed}});
  }
  return json_text(rows);
}

std::string audit_csv(const std::vector<AuditRow>& rows, const McConfig& config) {
  std::ostringstream os;
  os << "test,dgp,q,n,kappa,alpha,rate,stderr,M,seed\n";
  for (const auto& r : rows) {
    os << r.test.id() << ",uniform," << config.q << ',' << config.n << ",0," << fmt17(r.alpha)
       << ',' << fmt17(r.rate) << ',' << fmt17(r.stderr_) << ',' << config.M << ','
       << config.seed << '\n';
  }
  return os.str();
}

}  // namespace projunif
