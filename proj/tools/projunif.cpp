// projunif: uniformity tests on the hypersphere from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "projunif/harness.hpp"
#include "projunif/ingest.hpp"
#include "projunif/json_text.hpp"
#include "projunif/specfun.hpp"

using namespace projunif;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    for (std::string t; std::getline(ss, t, ',');)
      if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<TestSpec> parse_tests(const std::vector<std::string>& raw) {
  std::vector<TestSpec> tests;
  for (const auto& t : split_list(raw)) tests.push_back(parse_test(t));
  if (tests.empty()) throw std::invalid_argument("no tests given");
  return tests;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument(path + ": cannot write");
  out << text;
}

json query_json(const TailQuery& q) {
  return {{"K_max", q.K_max}, {"delta", q.delta}, {"imhof_accuracy", q.imhof_accuracy}};
}

// test ---------------------------------------------------------------------

struct TestArgs {
  std::string file;
  std::string format = "cartesian";
  bool header = false;
  bool drop_invalid = false;
  std::vector<std::string> tests{"cvm,ad,rt"};
  std::string pvalue = "asymp";
  int M = 10000;
  std::uint64_t seed = kDefaultSeed;
  TailQuery query;
  int q = 0;
};

int cmd_test(const TestArgs& a) {
  IngestOptions opt;
  opt.format = parse_format(a.format);
  opt.header = a.header;
  opt.drop_invalid = a.drop_invalid;
  const Ingested data = ingest(a.file, opt);
  const UnitSample& sample = data.sample;
  if (a.q > 0 && a.q != sample.q)
    throw std::invalid_argument("--q " + std::to_string(a.q) + " does not match the data (q = " +
                                std::to_string(sample.q) + ")");
  const auto tests = parse_tests(a.tests);

  PValueMode mode;
  if (a.pvalue == "asymp" || a.pvalue == "asymptotic") {
    mode.method = PMethod::Asymptotic;
  } else if (a.pvalue == "mc") {
    mode.method = PMethod::MonteCarlo;
  } else if (a.pvalue == "none") {
    mode.method = PMethod::None;
  } else {
    throw std::invalid_argument("--pvalue must be asymp, mc or none");
  }
  mode.M = a.M;
  mode.seed = a.seed;
  mode.query = a.query;
  if (mode.method == PMethod::Asymptotic && sample.n() < 2)
    throw std::invalid_argument("sample too small for asymptotic calibration");

  json results = json::array();
  json skipped = json::array();
  for (const auto& t : tests) {
    if (!t.supports(sample.q)) {
      skipped.push_back({{"test", t.id()},
                         {"error", t.label() + " is not defined for q = " + std::to_string(sample.q)}});
      continue;
    }
    PValueMode m = mode;
    if (m.method == PMethod::Asymptotic && !t.has_asymptotic(sample.q)) m.method = PMethod::MonteCarlo;
    const TestOutcome r = run_test(sample, t, m);
    json row = {{"test", t.id()},
                {"label", t.label()},
                {"statistic", r.statistic},
                {"p_value", r.p_value ? json(*r.p_value) : json(nullptr)},
                {"method", method_name(r.method)}};
    if (r.method == PMethod::MonteCarlo) row["params"] = {{"M", r.M}, {"seed", r.seed}};
    if (r.method == PMethod::Asymptotic)
      row["params"] = t.kind == TestKind::Rayleigh || t.kind == TestKind::Bingham
                          ? json{{"law", "chi-square"}}
                          : query_json(r.query);
    results.push_back(row);
  }
  json report = {{"input",
                  {{"source", data.source},
                   {"format", format_name(opt.format)},
                   {"rows", data.rows},
                   {"dropped_lines", data.dropped_lines}}},
                 {"q", sample.q},
                 {"n", sample.n()},
                 {"results", results}};
  if (!skipped.empty()) report["incompatible"] = skipped;
  std::cout << json_text(report) << '\n';
  return 0;
}

// cv -----------------------------------------------------------------------

struct CvArgs {
  std::vector<std::string> tests;
  int q = 1;
  int n = 0;
  bool asymptotic = false;
  std::vector<double> alphas{0.10, 0.05, 0.01};
  int M = 100000;
  std::uint64_t seed = kDefaultSeed;
  int workers = 0;
  TailQuery query;
  std::string output = "table";
  std::string out;
};

int cmd_cv(const CvArgs& a) {
  const auto tests = parse_tests(a.tests);
  if (!a.asymptotic && a.n < 1) throw std::invalid_argument("give --n or --asymptotic");
  for (double al : a.alphas)
    if (!(al > 0 && al < 1)) throw std::invalid_argument("alphas must lie in (0, 1)");
  for (const auto& t : tests)
    if (!t.supports(a.q))
      throw std::invalid_argument(t.label() + " is not defined for q = " + std::to_string(a.q));

  std::vector<CriticalValues> cvs;
  if (a.asymptotic) {
    for (const auto& t : tests)
      cvs.push_back({t, a.alphas, asymptotic_critical_values(t, a.q, a.alphas, a.query)});
  } else {
    McConfig cfg;
    cfg.M = a.M;
    cfg.n = a.n;
    cfg.q = a.q;
    cfg.alphas = a.alphas;
    cfg.seed = a.seed;
    cfg.workers = a.workers;
    cvs = mc_critical_values(tests, cfg);
  }

  const std::string n_text = a.asymptotic ? "inf" : std::to_string(a.n);
  std::ostringstream os;
  if (a.output == "json") {
    json rows = json::array();
    for (const auto& c : cvs)
      for (std::size_t i = 0; i < c.alphas.size(); ++i) {
        json row = {{"test", c.test.id()}, {"q", a.q},
                    {"n", a.asymptotic ? json("inf") : json(a.n)},
                    {"alpha", c.alphas[i]}, {"critical_value", c.values[i]}};
        if (a.asymptotic) {
          row["params"] = query_json(a.query);
        } else {
          row["M"] = a.M;
          row["seed"] = a.seed;
        }
        rows.push_back(row);
      }
    os << json_text(rows) << '\n';
  } else if (a.output == "csv") {
    os << "test,q,n,alpha,critical_value,M,seed\n";
    char buf[32];
    for (const auto& c : cvs)
      for (std::size_t i = 0; i < c.alphas.size(); ++i) {
        os << c.test.id() << ',' << a.q << ',' << n_text << ',';
        std::snprintf(buf, sizeof buf, "%.17g", c.alphas[i]);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", c.values[i]);
        os << buf << ',' << (a.asymptotic ? 0 : a.M) << ',' << a.seed << '\n';
      }
  } else if (a.output == "table") {
    os << "test      q      n";
    for (double al : a.alphas) os << "  alpha=" << fixed4(al);
    os << '\n';
    for (const auto& c : cvs) {
      char head[64];
      std::snprintf(head, sizeof head, "%-8s %2d %6s", c.test.label().c_str(), a.q, n_text.c_str());
      os << head;
      for (double v : c.values) {
        char cell[32];
        std::snprintf(cell, sizeof cell, "  %12s", fixed4(v).c_str());
        os << cell;
      }
      os << '\n';
    }
  } else {
    throw std::invalid_argument("--output must be table, csv or json");
  }
  write_text(a.out, os.str());
  return 0;
}

// power --------------------------------------------------------------------

const std::vector<std::string> kStandardDgps{"cvm", "ad", "rt", "vmf", "sc", "wat"};
const std::vector<std::string> kStandardTests{"rayleigh", "bingham", "ajne",     "gine", "ccf09",
                                            "bakshaev", "cvm",     "ad",       "rt"};

std::string dgp_label(const std::string& name) {
  if (name == "cvm") return "CvM";
  if (name == "ad") return "AD";
  if (name == "rt") return "Rt";
  if (name == "vmf") return "vMF";
  if (name == "sc") return "SC";
  if (name == "wat") return "W";
  return name;
}

struct PowerArgs {
  std::string config;
  std::string preset;
  double kappa = 0.5;
  int q = 0;
  int n = 0;
  int M = 0;
  int M_null = 0;
  std::uint64_t seed = kDefaultSeed;
  bool seed_set = false;
  int workers = 0;
  std::string csv;
  std::string json_out;
};

PowerConfig power_config(const PowerArgs& a) {
  PowerConfig cfg;
  std::vector<std::pair<std::string, double>> dgps;
  std::vector<std::string> tests;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw std::invalid_argument(a.config + ": cannot open");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw std::invalid_argument(a.config + ": " + e.what());
    }
    try {
      cfg.q = j.value("q", cfg.q);
      cfg.n = j.value("n", cfg.n);
      cfg.M = j.value("M", cfg.M);
      cfg.M_null = j.value("M_null", cfg.M_null);
      cfg.alpha = j.value("alpha", cfg.alpha);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.workers = j.value("workers", cfg.workers);
      cfg.ccf_directions = j.value("ccf_directions", cfg.ccf_directions);
      tests = j.value("tests", kStandardTests);
      for (const auto& d : j.at("dgps")) {
        if (d.is_string()) {
          dgps.emplace_back(d.get<std::string>(), a.kappa);
        } else {
          dgps.emplace_back(d.at("name").get<std::string>(), d.value("kappa", a.kappa));
        }
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument(a.config + ": " + e.what());
    }
  } else if (a.preset == "standard") {
    for (const auto& d : kStandardDgps) dgps.emplace_back(d, a.kappa);
    tests = kStandardTests;
  } else {
    throw std::invalid_argument("give --config FILE or --preset standard");
  }
  if (a.q > 0) cfg.q = a.q;
  if (a.n > 0) cfg.n = a.n;
  if (a.M > 0) cfg.M = a.M;
  if (a.M_null > 0) cfg.M_null = a.M_null;
  if (a.seed_set) cfg.seed = a.seed;
  if (a.workers > 0) cfg.workers = a.workers;
  for (const auto& [name, kappa] : dgps)
    cfg.dgps.push_back({dgp_label(name), kappa, AlternativeSpec::preset(name, kappa)});
  for (const auto& t : tests) {
    TestSpec spec = parse_test(t);
    if (spec.supports(cfg.q)) cfg.tests.push_back(spec);
  }
  if (cfg.dgps.empty() || cfg.tests.empty()) throw std::invalid_argument("empty power grid");
  return cfg;
}

int cmd_power(const PowerArgs& a) {
  const PowerTable table = power_study(power_config(a));
  if (!a.csv.empty()) write_text(a.csv, power_csv(table));
  if (!a.json_out.empty()) write_text(a.json_out, power_json(table) + "\n");

  std::ostringstream os;
  os << "DGP    kappa";
  for (const auto& t : table.config.tests) {
    char h[32];
    std::snprintf(h, sizeof h, " %9s", t.label().c_str());
    os << h;
  }
  os << '\n';
  for (std::size_t g = 0; g < table.config.dgps.size(); ++g) {
    char h[48];
    std::snprintf(h, sizeof h, "%-6s %5.2f", table.config.dgps[g].name.c_str(),
                  table.config.dgps[g].kappa);
    os << h;
    for (std::size_t t = 0; t < table.config.tests.size(); ++t) {
      const auto& c = table.cells[g * table.config.tests.size() + t];
      char cell[32];
      std::snprintf(cell, sizeof cell, " %8s%c", fixed4(c.rate).c_str(), c.best ? '*' : ' ');
      os << cell;
    }
    os << '\n';
  }
  os << "q = " << table.config.q << ", n = " << table.config.n << ", M = " << table.config.M
     << ", alpha = " << table.config.alpha << "; * not significantly below the row maximum\n";
  std::cout << os.str();
  return 0;
}

// sample -------------------------------------------------------------------

struct SampleArgs {
  std::string alt = "uniform";
  double kappa = 0.0;
  double eta = 0.0;
  double tau = 0.5;
  bool eta_set = false;
  int n = 0;
  int q = 0;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream = 0;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  if (a.n < 1) throw std::invalid_argument("--n must be positive");
  if (a.q < 1) throw std::invalid_argument("--q is required for generated data");
  AlternativeSpec spec;
  if (a.eta_set) {
    if (a.alt == "vmf") {
      spec = AlternativeSpec::vmf(a.eta);
    } else if (a.alt == "wat" || a.alt == "watson") {
      spec = AlternativeSpec::watson(a.eta);
    } else if (a.alt == "sc") {
      spec = AlternativeSpec::small_circle(a.eta, a.tau);
    } else {
      throw std::invalid_argument("--eta applies to vmf, wat and sc only");
    }
  } else {
    spec = AlternativeSpec::preset(a.alt, a.kappa);
  }
  RngStream rng(a.seed, a.stream);
  const UnitSample s = sample_alternative(spec, a.n, a.q, rng);
  std::ostringstream os;
  os << "# " << spec.id() << " q=" << a.q << " n=" << a.n << " seed=" << a.seed << '\n';
  write_sample_csv(os, s);
  write_text(a.out, os.str());
  return 0;
}

void add_query(CLI::App* sub, TailQuery& q) {
  sub->add_option("--kmax", q.K_max, "Series truncation K_max")->check(CLI::PositiveNumber);
  sub->add_option("--delta", q.delta, "Truncation tolerance of the p-value")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--imhof-accuracy", q.imhof_accuracy, "Absolute accuracy of the Imhof integral")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniformity tests on the hypersphere based on projected ecdfs"};
  app.require_subcommand(1);
  std::string cache;
  app.add_option("--cache-dir", cache, "Coefficient cache (default $PROJUNIF_CACHE_DIR)");

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Test a sample for uniformity; JSON report on stdout");
  test->add_option("file", ta.file, "Input file")->required();
  test->add_option("--format", ta.format, "cartesian, circular, orbital or latlon")
      ->check(CLI::IsMember({"cartesian", "circular", "orbital", "latlon"}));
  test->add_flag("--header", ta.header, "First line is a header");
  test->add_flag("--drop-invalid", ta.drop_invalid, "Drop malformed rows instead of failing");
  test->add_option("--tests,-t", ta.tests, "Comma-separated tests")->delimiter('\0');
  test->add_option("--pvalue", ta.pvalue, "asymp, mc or none");
  test->add_option("--M", ta.M, "Monte Carlo replicates")->check(CLI::PositiveNumber);
  test->add_option("--seed", ta.seed, "Seed");
  test->add_option("--q", ta.q, "Expected dimension");
  add_query(test, ta.query);

  CvArgs ca;
  auto* cv = app.add_subcommand("cv", "Critical values, exact-n by Monte Carlo or asymptotic");
  cv->add_option("--test,-t", ca.tests, "Comma-separated tests")->required();
  cv->add_option("--q", ca.q, "Dimension q")->required()->check(CLI::PositiveNumber);
  auto* cv_n = cv->add_option("--n", ca.n, "Sample size")->check(CLI::PositiveNumber);
  cv->add_flag("--asymptotic", ca.asymptotic, "Asymptotic critical values")->excludes(cv_n);
  cv->add_option("--alpha", ca.alphas, "Significance levels");
  cv->add_option("--M", ca.M, "Monte Carlo replicates")->check(CLI::PositiveNumber);
  cv->add_option("--seed", ca.seed, "Seed");
  cv->add_option("--workers", ca.workers, "Threads (0: all cores)");
  cv->add_option("--output", ca.output, "table, csv or json");
  cv->add_option("--out,-o", ca.out, "Output file (default stdout)");
  add_query(cv, ca.query);

  PowerArgs pa;
  auto* power = app.add_subcommand("power", "Empirical powers over a grid of alternatives");
  auto* cfg_opt = power->add_option("--config", pa.config, "JSON grid description");
  power->add_option("--preset", pa.preset, "Built-in grid: standard (six alternatives, nine tests)")->excludes(cfg_opt);
  power->add_option("--kappa", pa.kappa, "Deviation strength for presets and bare DGP names");
  power->add_option("--q", pa.q, "Override q");
  power->add_option("--n", pa.n, "Override n");
  power->add_option("--M", pa.M, "Override replicates per DGP");
  power->add_option("--M-null", pa.M_null, "Override null replicates");
  auto* pseed = power->add_option("--seed", pa.seed, "Override seed");
  power->add_option("--workers", pa.workers, "Threads (0: all cores)");
  power->add_option("--csv", pa.csv, "Write the table as CSV");
  power->add_option("--json", pa.json_out, "Write the table as JSON");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw a sample as CSV");
  sample->add_option("--alt", sa.alt, "uniform, vmf, wat, sc, cvm, ad or rt");
  sample->add_option("--kappa", sa.kappa, "Deviation strength");
  auto* eta = sample->add_option("--eta", sa.eta, "Concentration for vmf, wat, sc");
  sample->add_option("--tau", sa.tau, "Small-circle location (sc)");
  sample->add_option("--n", sa.n, "Sample size")->required();
  sample->add_option("--q", sa.q, "Dimension q")->required();
  sample->add_option("--seed", sa.seed, "Seed");
  sample->add_option("--stream", sa.stream, "Stream id");
  sample->add_option("--out,-o", sa.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInput;
  }

  try {
    if (!cache.empty()) set_cache_dir(cache);
    if (*test) return cmd_test(ta);
    if (*cv) return cmd_cv(ca);
    if (*power) {
      pa.seed_set = pseed->count() > 0;
      return cmd_power(pa);
    }
    if (*sample) {
      sa.eta_set = eta->count() > 0;
      return cmd_sample(sa);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
