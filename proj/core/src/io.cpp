#include "stmatern/io.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace stmatern {
namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    std::string_view field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(long line_no, const std::string& what) {
  throw std::invalid_argument("observations line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view s, long line_no, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail(line_no, "cannot parse " + std::string(column) + " value '" + std::string(s) + "'");
  }
  return v;
}

long parse_step(std::string_view s, long line_no) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // Accept integral values written as floating point, e.g. "3.0".
    const double d = parse_double(s, line_no, "time");
    if (d != std::floor(d)) parse_fail(line_no, "time must be an integer step index");
    v = static_cast<long>(d);
  }
  if (v < 1) parse_fail(line_no, "time must be a step index >= 1");
  return v;
}

}  // namespace

ObservationSet read_observations(std::istream& is, long n_steps) {
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!split(line).front().empty() || split(line).size() > 1) break;
  }
  if (line.empty()) throw std::invalid_argument("observations: missing header");
  const auto header = split(line);
  const std::vector<std::string_view> required = {"time", "x", "y", "value"};
  if (header.size() < required.size()) throw std::invalid_argument("observations: header must start with time,x,y,value");
  for (std::size_t i = 0; i < required.size(); ++i) {
    if (header[i] != required[i]) {
      throw std::invalid_argument("observations: header must start with time,x,y,value");
    }
  }

  ObservationSet obs;
  for (std::size_t i = required.size(); i < header.size(); ++i) {
    if (header[i].substr(0, 4) != "cov_" || header[i].size() == 4) {
      throw std::invalid_argument("observations: extra column '" + std::string(header[i]) +
                                  "' must be named cov_<name>");
    }
    obs.covariate_names.emplace_back(header[i]);
  }
  const std::size_t p = obs.covariate_names.size();

  std::map<std::pair<double, double>, std::size_t> station_index;
  std::vector<std::vector<double>> station_covs;
  std::map<long, std::vector<Observation>> by_step;
  std::set<std::pair<long, std::size_t>> seen;
  while (std::getline(is, line)) {
    ++line_no;
    const auto f = split(line);
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != header.size()) {
      parse_fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(f.size()));
    }
    const long n = parse_step(f[0], line_no);
    const Location s{parse_double(f[1], line_no, "x"), parse_double(f[2], line_no, "y")};
    const double value = parse_double(f[3], line_no, "value");
    std::vector<double> cov(p);
    for (std::size_t i = 0; i < p; ++i) cov[i] = parse_double(f[4 + i], line_no, header[4 + i]);

    auto [it, inserted] = station_index.try_emplace({s[0], s[1]}, obs.locations.size());
    if (inserted) {
      obs.locations.push_back(s);
      station_covs.push_back(cov);
    } else if (station_covs[it->second] != cov) {
      parse_fail(line_no, "covariates differ from an earlier row of the same station");
    }
    if (!seen.insert({n, it->second}).second) parse_fail(line_no, "duplicate (time, station) row");
    by_step[n].push_back({it->second, value});
  }

  const long last = by_step.empty() ? 0 : by_step.rbegin()->first;
  if (n_steps > 0 && last > n_steps) {
    throw std::invalid_argument("observations: step " + std::to_string(last) + " exceeds N = " +
                                std::to_string(n_steps));
  }
  obs.steps.assign(static_cast<std::size_t>(n_steps > 0 ? n_steps : last), {});
  for (auto& [n, rows] : by_step) {
    std::sort(rows.begin(), rows.end(), [](const Observation& a, const Observation& b) { return a.loc < b.loc; });
    obs.steps[static_cast<std::size_t>(n - 1)] = std::move(rows);
  }
  obs.covariates.resize(static_cast<Eigen::Index>(obs.locations.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < station_covs.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      obs.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = station_covs[i][j];
    }
  }
  return obs;
}

ObservationSet read_observations_file(const std::string& path, long n_steps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open observation file '" + path + "'");
  return read_observations(in, n_steps);
}

void write_observations(std::ostream& os, const ObservationSet& obs) {
  os << "time,x,y,value";
  for (const auto& name : obs.covariate_names) {
    os << ',' << (name.rfind("cov_", 0) == 0 ? name : "cov_" + name);
  }
  os << '\n' << std::setprecision(17);
  for (std::size_t n = 0; n < obs.steps.size(); ++n) {
    for (const auto& o : obs.steps[n]) {
      const auto& s = obs.locations[o.loc];
      os << n + 1 << ',' << s[0] << ',' << s[1] << ',' << o.value;
      for (Eigen::Index j = 0; j < obs.covariates.cols(); ++j) {
        os << ',' << obs.covariates(static_cast<Eigen::Index>(o.loc), j);
      }
      os << '\n';
    }
  }
}

json to_json(const NaturalParams& p) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumOptCoords; ++i) {
    j[std::string(kParamNames[i])] = natural_value(p.values(), static_cast<OptCoord>(i));
  }
  return j;
}

NaturalParams params_from_json(const json& j, const NaturalParams& base) {
  if (!j.is_object()) throw std::invalid_argument("params: expected a JSON object");
  NaturalValues v = base.values();
  for (const auto& [key, value] : j.items()) {
    std::size_t i = 0;
    while (i < kNumOptCoords && kParamNames[i] != key) ++i;
    if (i == kNumOptCoords) throw std::invalid_argument("params: unknown key '" + key + "'");
    if (!value.is_number()) throw std::invalid_argument("params: '" + key + "' must be a number");
    set_natural_value(v, static_cast<OptCoord>(i), value.get<double>());
  }
  return NaturalParams(v);
}

json to_json(const FitResult& r, const std::vector<std::string>& beta_names) {
  json beta = json::object();
  for (std::size_t i = 0; i < r.beta_hat.size(); ++i) {
    beta[i < beta_names.size() ? beta_names[i] : "beta_" + std::to_string(i)] = r.beta_hat[i];
  }
  return {{"beta_hat", beta},
          {"theta_hat", to_json(r.theta_hat)},
          {"loglik", r.loglik},
          {"loglik_init", r.loglik_init},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"converged", r.converged},
          {"message", r.message},
          {"trace", r.trace}};
}

json to_json(const RationalApprox& ra) {
  return {{"m", ra.m}, {"eta", ra.eta}, {"p", ra.p}, {"q", ra.q}, {"grid_error", ra.grid_error},
          {"warning", ra.warning}};
}

json to_json(const RectangleDomain& dom) {
  if (dom.dim == 1) return {{"dim", 1}, {"lengths", {dom.lengths[0]}}, {"origin", {dom.origin[0]}}};
  return {{"dim", 2}, {"lengths", dom.lengths}, {"origin", dom.origin}};
}

RectangleDomain domain_from_json(const json& j) {
  const int dim = j.value("dim", 2);
  const auto lengths = j.value("lengths", std::vector<double>(static_cast<std::size_t>(dim), 1.0));
  const auto origin = j.value("origin", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  if (lengths.size() != static_cast<std::size_t>(dim) || origin.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("domain: lengths and origin need dim entries");
  }
  return dim == 1 ? RectangleDomain::interval(lengths[0], origin[0])
                  : RectangleDomain::rectangle(lengths[0], lengths[1], origin[0], origin[1]);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open JSON file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("cannot parse JSON file '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write JSON file '" + path + "'");
  out << j.dump(2) << '\n';
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json run_manifest(const std::string& command, const json& config, std::uint64_t seed,
                  const std::vector<std::string>& outputs) {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream compiler;
#if defined(__clang__)
  compiler << "clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__;
#elif defined(__GNUC__)
  compiler << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__;
#else
  compiler << "unknown";
#endif
  return {{"command", command},
          {"version", kVersion},
          {"eigen", eigen.str()},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", compiler.str()},
          {"config_hash", config_hash(config)},
          {"seed", seed},
          {"config", config},
          {"outputs", outputs}};
}

}  // namespace stmatern
