#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "projunif/chi2mix.hpp"
#include "projunif/coeffs.hpp"
#include "projunif/harness.hpp"
#include "projunif/kernels.hpp"
#include "projunif/sampling.hpp"
#include "projunif/specfun.hpp"
#include "projunif/statistics.hpp"

namespace py = pybind11;
using namespace projunif;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

UnitSample to_sample(const Array& x, bool normalize) {
  if (x.ndim() != 2 || x.shape(1) < 2)
    throw std::invalid_argument("expected an (n, q + 1) array with q >= 1");
  const auto n = x.shape(0), d = x.shape(1);
  UnitSample s(static_cast<int>(d - 1), std::vector<double>(x.data(), x.data() + n * d));
  if (normalize) s.normalize();
  return s;
}

Array to_array(const UnitSample& s) {
  Array out({s.n(), s.dim()});
  std::copy(s.x.begin(), s.x.end(), out.mutable_data());
  return out;
}

TailQuery make_query(int K_max, double delta, double accuracy) {
  TailQuery q;
  q.K_max = K_max;
  q.delta = delta;
  q.imhof_accuracy = accuracy;
  return q;
}

PMethod parse_method(const std::string& m) {
  if (m == "asymp" || m == "asymptotic") return PMethod::Asymptotic;
  if (m == "mc") return PMethod::MonteCarlo;
  if (m == "none") return PMethod::None;
  throw std::invalid_argument("method must be asymp, mc or none");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Uniformity tests on the hypersphere based on projected ecdfs.";

  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "statistic",
      [](const Array& x, const std::string& test, bool normalize) {
        return statistic(parse_test(test), to_sample(x, normalize));
      },
      py::arg("x"), py::arg("test") = "cvm", py::arg("normalize") = true,
      "Test statistic of the rows of x.");

  m.def(
      "test",
      [](const Array& x, const std::string& test, const std::string& method, int M,
         std::uint64_t seed, int K_max, double delta, double accuracy) {
        PValueMode mode;
        mode.method = parse_method(method);
        mode.M = M;
        mode.seed = seed;
        mode.query = make_query(K_max, delta, accuracy);
        const auto s = to_sample(x, true);
        const auto spec = parse_test(test);
        if (mode.method == PMethod::Asymptotic && !spec.has_asymptotic(s.q))
          mode.method = PMethod::MonteCarlo;
        if (mode.method == PMethod::Asymptotic && s.n() < 2)
          throw std::invalid_argument("sample too small for asymptotic calibration");
        const auto r = run_test(s, spec, mode);
        py::dict out;
        out["test"] = spec.id();
        out["statistic"] = r.statistic;
        out["p_value"] = r.p_value ? py::cast(*r.p_value) : py::none();
        out["method"] = method_name(r.method);
        out["q"] = r.q;
        out["n"] = r.n;
        return out;
      },
      py::arg("x"), py::arg("test") = "cvm", py::arg("method") = "asymp", py::arg("M") = 10000,
      py::arg("seed") = kDefaultSeed, py::arg("K_max") = kDefaultKmax, py::arg("delta") = 0.0,
      py::arg("accuracy") = kDefaultImhofAccuracy,
      "Statistic and p-value as a dict.");

  m.def(
      "asymptotic_pvalue",
      [](double stat, const std::string& test, int q, int K_max, double delta, double accuracy) {
        return asymptotic_pvalue(stat, parse_test(test), q, make_query(K_max, delta, accuracy));
      },
      py::arg("stat"), py::arg("test"), py::arg("q"), py::arg("K_max") = kDefaultKmax,
      py::arg("delta") = 0.0, py::arg("accuracy") = kDefaultImhofAccuracy);

  m.def(
      "asymptotic_critical_values",
      [](const std::string& test, int q, const std::vector<double>& alphas, int K_max) {
        TailQuery query;
        query.K_max = K_max;
        return asymptotic_critical_values(parse_test(test), q, alphas, query);
      },
      py::arg("test"), py::arg("q"), py::arg("alphas") = std::vector<double>{0.10, 0.05, 0.01},
      py::arg("K_max") = kDefaultKmax);

  m.def(
      "critical_values",
      [](const std::string& test, int q, int n, const std::vector<double>& alphas, int M,
         std::uint64_t seed, int workers) {
        McConfig cfg;
        cfg.q = q;
        cfg.n = n;
        cfg.alphas = alphas;
        cfg.M = M;
        cfg.seed = seed;
        cfg.workers = workers;
        py::gil_scoped_release release;
        return mc_critical_values({parse_test(test)}, cfg)[0].values;
      },
      py::arg("test"), py::arg("q"), py::arg("n"),
      py::arg("alphas") = std::vector<double>{0.10, 0.05, 0.01}, py::arg("M") = 10000,
      py::arg("seed") = kDefaultSeed, py::arg("workers") = 0,
      "Exact-n critical values by Monte Carlo.");

  m.def(
      "sample",
      [](const std::string& alt, int n, int q, double kappa, std::uint64_t seed,
         std::uint64_t stream) {
        RngStream rng(seed, stream);
        return to_array(sample_alternative(AlternativeSpec::preset(alt, kappa), n, q, rng));
      },
      py::arg("alt"), py::arg("n"), py::arg("q"), py::arg("kappa") = 0.0,
      py::arg("seed") = kDefaultSeed, py::arg("stream") = 0,
      "Draws n rows from uniform, vmf, wat, sc, cvm, ad or rt.");

  m.def(
      "psi",
      [](int q, double theta, const std::string& weight) { return psi(q, theta, parse_weight(weight)); },
      py::arg("q"), py::arg("theta"), py::arg("weight") = "cvm", "Kernel at angle theta.");

  m.def(
      "coefficients",
      [](const std::string& weight, int q, int K) { return coefficients(parse_weight(weight), q, K).b; },
      py::arg("weight"), py::arg("q"), py::arg("K"), "b_0, ..., b_K.");

  m.def("set_cache_dir", &set_cache_dir, py::arg("path"));
  m.def("cache_dir", &cache_dir);
}
