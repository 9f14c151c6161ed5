#include "stmatern/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace stmatern {
namespace {

constexpr double kNuLow = 0.25;
constexpr double kNuTHigh = 3.25;
constexpr double kScaleLow = 0.005;
// exp() arguments are clamped so results stay finite and nonzero.
constexpr double kMaxExpArg = 700.0;

[[noreturn]] void fail(std::string_view name, double value, std::string_view bound) {
  std::ostringstream os;
  os << "NaturalParams: " << name << " = " << value << " violates " << bound;
  throw std::invalid_argument(os.str());
}

double clamped_exp(double x) { return std::exp(std::clamp(x, -kMaxExpArg, kMaxExpArg)); }

double above(double low, double value) {
  return std::max(value, std::nextafter(low, std::numeric_limits<double>::infinity()));
}

double below(double high, double value) {
  return std::min(value, std::nextafter(high, -std::numeric_limits<double>::infinity()));
}

}  // namespace

NaturalParams::NaturalParams(const NaturalValues& v) : v_(v) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(v.nu_s) || !(v.nu_s > kNuLow)) fail("nu_s", v.nu_s, "nu_s > 0.25");
  if (!finite(v.nu_t) || !(v.nu_t > kNuLow && v.nu_t < kNuTHigh)) {
    fail("nu_t", v.nu_t, "0.25 < nu_t < 3.25");
  }
  if (!finite(v.r_s) || !(v.r_s > kScaleLow)) fail("r_s", v.r_s, "r_s > 0.005");
  if (!finite(v.r_t) || !(v.r_t > kScaleLow)) fail("r_t", v.r_t, "r_t > 0.005");
  if (!finite(v.beta_sep) || v.beta_sep < 0.0 || v.beta_sep > 1.0) {
    fail("beta_s", v.beta_sep, "0 <= beta_s <= 1");
  }
  if (!finite(v.sigma) || !(v.sigma > kScaleLow)) fail("sigma", v.sigma, "sigma > 0.005");
  if (!finite(v.sigma_obs) || !(v.sigma_obs > 0.0)) {
    fail("sigma_obs", v.sigma_obs, "sigma_obs > 0");
  }
}

bool satisfies_existence(const SpdeParams& p, int dim) {
  return p.gamma > 0.5 && p.beta + p.alpha * (2.0 * p.gamma - 1.0) - 0.5 * dim > 0.0;
}

void check_existence(const SpdeParams& p, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
  if (!(p.gamma > 0.5)) {
    throw std::invalid_argument("SpdeParams: gamma must exceed 1/2, got " + std::to_string(p.gamma));
  }
  if (!satisfies_existence(p, dim)) {
    std::ostringstream os;
    os << "SpdeParams: beta + alpha(2 gamma - 1) - d/2 = "
       << p.beta + p.alpha * (2.0 * p.gamma - 1.0) - 0.5 * dim << " must be positive";
    throw std::invalid_argument(os.str());
  }
  if (!(p.kappa > 0.0) || !(p.r > 0.0) || !(p.C > 0.0) || p.alpha < 0.0) {
    throw std::invalid_argument("SpdeParams: kappa, r, C must be positive and alpha >= 0");
  }
}

SpdeParams to_spde(const NaturalParams& p, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
  const double bstar = p.nu_s() / (p.nu_s() + 0.5 * dim);
  const double ratio = p.beta_sep() / bstar;

  SpdeParams s;
  s.gamma = p.nu_t() * std::max(1.0, ratio) + 0.5;
  s.alpha = p.nu_s() / (2.0 * p.nu_t()) * std::min(1.0, ratio);
  s.beta = (1.0 - p.beta_sep()) / bstar * p.nu_s();
  s.kappa = std::sqrt(8.0 * p.nu_s()) / p.r_s();
  s.r = p.r_t() * std::pow(s.kappa, 2.0 * s.alpha) / std::sqrt(8.0 * (s.gamma - 0.5));
  s.C = 1.0;
  s.sigma = p.sigma();
  s.sigma_obs = p.sigma_obs();
  check_existence(s, dim);
  return s;
}

NaturalParams to_natural(const SpdeParams& p, int dim) {
  check_existence(p, dim);
  const double smooth_part = (2.0 * p.gamma - 1.0) * p.alpha;
  NaturalValues v;
  v.nu_s = p.beta + smooth_part - 0.5 * dim;
  // nu_t = min(gamma - 1/2, nu_s / (2 alpha)); the min() term vanishes for alpha = 0.
  const double deficit = std::min(p.beta - 0.5 * dim, 0.0);
  v.nu_t = p.gamma - 0.5 + (deficit < 0.0 ? deficit / (2.0 * p.alpha) : 0.0);
  v.beta_sep = smooth_part / (p.beta + smooth_part);
  v.r_s = std::sqrt(8.0 * v.nu_s) / p.kappa;
  v.r_t = temporal_range(p);
  v.sigma = p.sigma;
  v.sigma_obs = p.sigma_obs;
  return NaturalParams(v);
}

double temporal_range(const SpdeParams& p) {
  return p.r * std::pow(p.kappa, -2.0 * p.alpha) * std::sqrt(8.0 * (p.gamma - 0.5));
}

double natural_value(const NaturalValues& v, OptCoord c) {
  switch (c) {
    case OptCoord::NuT: return v.nu_t;
    case OptCoord::NuS: return v.nu_s;
    case OptCoord::BetaSep: return v.beta_sep;
    case OptCoord::RT: return v.r_t;
    case OptCoord::RS: return v.r_s;
    case OptCoord::Sigma: return v.sigma;
    case OptCoord::SigmaObs: return v.sigma_obs;
  }
  throw std::invalid_argument("unknown OptCoord");
}

void set_natural_value(NaturalValues& v, OptCoord c, double value) {
  switch (c) {
    case OptCoord::NuT: v.nu_t = value; return;
    case OptCoord::NuS: v.nu_s = value; return;
    case OptCoord::BetaSep: v.beta_sep = value; return;
    case OptCoord::RT: v.r_t = value; return;
    case OptCoord::RS: v.r_s = value; return;
    case OptCoord::Sigma: v.sigma = value; return;
    case OptCoord::SigmaObs: v.sigma_obs = value; return;
  }
  throw std::invalid_argument("unknown OptCoord");
}

double to_opt_coord(OptCoord c, double value) {
  auto reject = [&](std::string_view bound) -> double {
    std::ostringstream os;
    os << "to_opt: " << kParamNames[static_cast<std::size_t>(c)] << " = " << value
       << " outside open interval " << bound;
    throw std::domain_error(os.str());
  };
  if (!std::isfinite(value)) return reject("(finite)");
  switch (c) {
    case OptCoord::NuT: {
      const double x = value - kNuLow;
      if (!(x > 0.0 && x < 3.0)) return reject("(0.25, 3.25)");
      return std::log(x / 2.5) - std::log(1.0 - x / 3.0);
    }
    case OptCoord::NuS:
      if (!(value > kNuLow)) return reject("(0.25, inf)");
      return std::log(value - kNuLow);
    case OptCoord::BetaSep:
      if (!(value > 0.0 && value < 1.0)) return reject("(0, 1)");
      return std::log(-2.0 * value / (value - 1.0)) / 3.0;
    case OptCoord::RT:
    case OptCoord::RS:
    case OptCoord::Sigma:
      if (!(value > kScaleLow)) return reject("(0.005, inf)");
      return std::log(value - kScaleLow);
    case OptCoord::SigmaObs:
      if (!(value > 0.0)) return reject("(0, inf)");
      return std::log(value);
  }
  throw std::invalid_argument("unknown OptCoord");
}

double from_opt_coord(OptCoord c, double x) {
  if (!std::isfinite(x)) throw std::domain_error("from_opt: non-finite coordinate");
  switch (c) {
    case OptCoord::NuT: {
      // log(1.2 y / (3 - y)) = x  =>  y = 3 e^x / (1.2 + e^x)
      const double y = x > 0.0 ? 3.0 / (1.2 * clamped_exp(-x) + 1.0)
                               : 3.0 * clamped_exp(x) / (1.2 + clamped_exp(x));
      return below(kNuTHigh, above(kNuLow, kNuLow + y));
    }
    case OptCoord::NuS: return above(kNuLow, kNuLow + clamped_exp(x));
    case OptCoord::BetaSep: {
      // -2b/(b-1) = e^{3x}  =>  b = e^{3x} / (2 + e^{3x})
      return x > 0.0 ? 1.0 / (2.0 * clamped_exp(-3.0 * x) + 1.0)
                     : clamped_exp(3.0 * x) / (2.0 + clamped_exp(3.0 * x));
    }
    case OptCoord::RT:
    case OptCoord::RS:
    case OptCoord::Sigma: return above(kScaleLow, kScaleLow + clamped_exp(x));
    case OptCoord::SigmaObs: return clamped_exp(x);
  }
  throw std::invalid_argument("unknown OptCoord");
}

OptVector to_opt(const NaturalParams& p) {
  OptVector out;
  for (std::size_t i = 0; i < kNumOptCoords; ++i) {
    const auto c = static_cast<OptCoord>(i);
    out[c] = to_opt_coord(c, natural_value(p.values(), c));
  }
  return out;
}

NaturalParams from_opt(const OptVector& v) {
  NaturalValues nv;
  for (std::size_t i = 0; i < kNumOptCoords; ++i) {
    const auto c = static_cast<OptCoord>(i);
    set_natural_value(nv, c, from_opt_coord(c, v[c]));
  }
  return NaturalParams(nv);
}

}  // namespace stmatern
