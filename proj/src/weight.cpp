#include "projunif/weight.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace projunif {

namespace {

std::string format_param(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

WeightSpec WeightSpec::cvm() {
  WeightSpec w;
  w.kind = WeightKind::CvM;
  w.label = "cvm";
  return w;
}

WeightSpec WeightSpec::ad() {
  WeightSpec w;
  w.kind = WeightKind::AD;
  w.label = "ad";
  return w;
}

WeightSpec WeightSpec::rothman(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::invalid_argument("Rothman parameter t must lie in (0, 1)");
  }
  WeightSpec w;
  w.kind = WeightKind::Rothman;
  w.param = t;
  w.label = "rt";
  return w;
}

WeightSpec WeightSpec::dirac(double u) {
  if (!(u > 0.0 && u <= 1.0)) {
    throw std::invalid_argument("Dirac atom must lie in (0, 1]");
  }
  WeightSpec w;
  w.kind = WeightKind::Dirac;
  w.param = u;
  w.label = "dirac";
  return w;
}

WeightSpec WeightSpec::density(std::function<double(double)> cdf,
                               std::string label) {
  if (!cdf) throw std::invalid_argument("density weight needs a cdf");
  const double w0 = cdf(0.0);
  const double w1 = cdf(1.0);
  if (std::abs(w0) > 1e-12 || std::abs(w1 - 1.0) > 1e-12) {
    throw std::invalid_argument("density weight cdf must satisfy W(0)=0, W(1)=1");
  }
  WeightSpec w;
  w.kind = WeightKind::Density;
  w.cdf = std::move(cdf);
  w.label = std::move(label);
  return w;
}

double WeightSpec::t_m() const { return std::min(param, 1.0 - param); }

std::string WeightSpec::id() const {
  switch (kind) {
    case WeightKind::CvM:
      return "cvm";
    case WeightKind::AD:
      return "ad";
    case WeightKind::Rothman:
      return "rt:" + format_param(param);
    case WeightKind::Dirac:
      return "dirac:" + format_param(param);
    case WeightKind::Density:
      return "density:" + label;
  }
  return "unknown";
}

int WeightSpec::code() const { return static_cast<int>(kind); }

double WeightSpec::eval(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  switch (kind) {
    case WeightKind::CvM:
      return u;
    case WeightKind::Rothman:
      return 0.5 * ((u >= t_m() ? 1.0 : 0.0) + (u >= 1.0 - t_m() ? 1.0 : 0.0));
    case WeightKind::Dirac:
      return u >= param ? 1.0 : 0.0;
    case WeightKind::Density:
      return cdf(u);
    case WeightKind::AD:
      break;
  }
  throw std::invalid_argument("the Anderson-Darling weight is not a cdf");
}

double parse_number(const std::string& text) {
  auto one = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw std::invalid_argument("bad number: " + text);
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string::npos) {
    return one(text.substr(0, slash)) / one(text.substr(slash + 1));
  }
  return one(text);
}

WeightSpec parse_weight(const std::string& text) {
  std::string name = text;
  std::string arg;
  if (auto pos = text.find(':'); pos != std::string::npos) {
    name = text.substr(0, pos);
    arg = text.substr(pos + 1);
  }
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto number = [&](double fallback) {
    if (arg.empty()) return fallback;
    return parse_number(arg);
  };
  if (name == "cvm") return WeightSpec::cvm();
  if (name == "ad") return WeightSpec::ad();
  if (name == "rt" || name == "rothman") return WeightSpec::rothman(number(1.0 / 3.0));
  if (name == "dirac") return WeightSpec::dirac(number(0.5));
  throw std::invalid_argument("unknown weight: " + text);
}

}  // namespace projunif
