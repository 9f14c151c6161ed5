#include "stmatern/covariance.hpp"
#include "stmatern/harness.hpp"
#include "stmatern/inference.hpp"
#include "stmatern/io.hpp"
#include "stmatern/kalman.hpp"
#include "stmatern/parallel.hpp"
#include "stmatern/spectral.hpp"
#include "stmatern/statespace.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stmatern;

namespace {

/// Collects flag values that override keys of the JSON config.
class Overrides {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& pointer, const std::string& help) {
    auto slot = std::make_shared<std::optional<T>>();
    patches_.push_back([slot, pointer](json& cfg) {
      if (*slot) cfg[json::json_pointer(pointer)] = **slot;
    });
    return app->add_option(flag, *slot, help);
  }

  void apply(json& cfg) const {
    for (const auto& p : patches_) p(cfg);
  }

 private:
  std::vector<std::function<void(json&)>> patches_;
};

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  Overrides overrides;
};

template <class T>
T get_or(const json& cfg, const std::string& pointer, T fallback) {
  const json::json_pointer ptr(pointer);
  return cfg.contains(ptr) ? cfg.at(ptr).get<T>() : fallback;
}

json load_config(const Common& c, const std::string& command) {
  json cfg = c.config_path.empty() ? json::object() : read_json_file(c.config_path);
  if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");
  if (cfg.contains(command) && cfg[command].is_object()) {
    // A section named after the subcommand overrides top-level keys.
    json section = cfg[command];
    cfg.erase(command);
    cfg.update(section);
  }
  c.overrides.apply(cfg);
  return cfg;
}

fs::path output(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

void finish(const Common& c, const std::string& command, const json& cfg, const std::vector<std::string>& outputs,
            const json& extra = json::object()) {
  json manifest = run_manifest(command, cfg, c.seed, outputs);
  if (!extra.empty()) manifest["results"] = extra;
  const fs::path p = output(c, command + "_manifest.json");
  write_json_file(p.string(), manifest);
  for (const auto& o : outputs) std::cout << "wrote " << o << '\n';
  std::cout << "wrote " << p.string() << '\n';
}

RectangleDomain domain_of(const json& cfg) {
  return cfg.contains("domain") ? domain_from_json(cfg["domain"]) : RectangleDomain::rectangle(1.0, 1.0);
}

TimeGrid grid_of(const json& cfg, long n_default) {
  TimeGrid g{get_or(cfg, "/dt", 1.0), get_or(cfg, "/N", n_default)};
  g.validate();
  return g;
}

LbfgsOptions optimizer_of(const json& cfg, unsigned threads) {
  LbfgsOptions o;
  o.max_iter = get_or(cfg, "/optimizer/max_iter", o.max_iter);
  o.rel_tol = get_or(cfg, "/optimizer/rel_tol", o.rel_tol);
  o.fd_step = get_or(cfg, "/optimizer/fd_step", o.fd_step);
  o.history = get_or(cfg, "/optimizer/history", o.history);
  o.threads = threads;
  return o;
}

std::vector<ModelKind> models_of(const json& cfg, std::vector<ModelKind> fallback) {
  if (!cfg.contains("models")) return fallback;
  std::vector<ModelKind> out;
  for (const auto& s : cfg["models"]) out.push_back(parse_model_kind(s.get<std::string>()));
  return out;
}

NaturalParams params_of(const json& cfg, const NaturalParams& base) {
  return cfg.contains("params") ? params_from_json(cfg["params"], base) : base;
}

/// theta and beta from "fit_file" (a fit JSON) and/or inline "params"/"beta".
std::pair<NaturalParams, std::vector<double>> model_of(const json& cfg) {
  NaturalParams theta{NaturalValues{}};
  std::vector<double> beta;
  if (cfg.contains("fit_file")) {
    const json fit = read_json_file(cfg["fit_file"].get<std::string>());
    theta = params_from_json(fit.at("theta_hat"), theta);
    for (const auto& [k, v] : fit.at("beta_hat").items()) beta.push_back(v.get<double>());
  } else if (!cfg.contains("params")) {
    throw std::runtime_error("need model parameters: set 'params' or 'fit_file'");
  }
  theta = params_of(cfg, theta);
  if (cfg.contains("beta")) beta = cfg["beta"].get<std::vector<double>>();
  return {theta, beta};
}

ObservationSet observations_of(const json& cfg, const RectangleDomain& dom) {
  if (!cfg.contains("observations")) throw std::runtime_error("need 'observations' (CSV path)");
  ObservationSet obs = read_observations_file(cfg["observations"].get<std::string>(), get_or(cfg, "/N", 0L));
  obs.validate(dom);
  return obs;
}

std::vector<Location> locations_of(const json& cfg, const RectangleDomain& dom) {
  if (cfg.contains("locations")) {
    std::vector<Location> out;
    for (const auto& p : cfg["locations"]) {
      const auto v = p.get<std::vector<double>>();
      if (v.empty() || v.size() > 2) throw std::runtime_error("locations entries are [x] or [x, y]");
      out.push_back({v[0], v.size() > 1 ? v[1] : 0.0});
    }
    return out;
  }
  return score_grid(dom, get_or(cfg, "/grid_n", 21));
}

int run_basis(const Common& c) {
  const json cfg = load_config(c, "basis");
  const SpectralBasis b = build_basis(domain_of(cfg), get_or<std::size_t>(cfg, "/M", 64));
  const fs::path p = output(c, "basis.csv");
  auto out = open_out(p);
  write_basis_csv(out, b);
  finish(c, "basis", cfg, {p.string()});
  return 0;
}

int run_verify(const Common& c) {
  const json cfg = load_config(c, "verify-cov");
  VerifyConfig vc;
  vc.M = get_or(cfg, "/M", vc.M);
  vc.dt = get_or(cfg, "/dt", vc.dt);
  vc.grid_n = get_or(cfg, "/grid_n", vc.grid_n);
  vc.nu_t = VerifyConfig::default_sweep(get_or(cfg, "/nu_t_step", 0.05));
  if (cfg.contains("nu_t")) vc.nu_t = cfg["nu_t"].get<std::vector<double>>();
  if (cfg.contains("ms")) vc.ms = cfg["ms"].get<std::vector<int>>();
  const auto rows = verify_covariance(vc, c.threads);
  const fs::path p = output(c, "verify_cov.csv");
  auto out = open_out(p);
  write_verify_csv(out, rows);

  json summary = json::array();
  for (const auto& cs : vc.cases) {
    for (int m : vc.ms) {
      std::vector<double> e;
      for (const auto& r : rows) {
        if (r.label == cs.label && r.m == m) e.push_back(r.sup_error);
      }
      std::sort(e.begin(), e.end());
      const double below = static_cast<double>(std::count_if(e.begin(), e.end(), [](double x) { return x < 0.1; }));
      summary.push_back({{"case", cs.label}, {"m", m}, {"median", e[e.size() / 2]},
                         {"fraction_below_0.1", below / static_cast<double>(e.size())}});
      std::cout << cs.label << " m=" << m << " median=" << e[e.size() / 2]
                << " below_0.1=" << below / static_cast<double>(e.size()) << '\n';
    }
  }
  finish(c, "verify-cov", cfg, {p.string()}, summary);
  return 0;
}

int run_rate(const Common& c) {
  const json cfg = load_config(c, "rate-check");
  RateConfig rc;
  rc.dom = cfg.contains("domain") ? domain_from_json(cfg["domain"]) : rc.dom;
  if (cfg.contains("Ms")) rc.Ms = cfg["Ms"].get<std::vector<std::size_t>>();
  rc.reference_terms = get_or(cfg, "/reference_terms", rc.reference_terms);
  const auto nus = cfg.contains("nu_s") ? cfg["nu_s"].get<std::vector<double>>() : std::vector<double>{0.5, 1.5};
  std::vector<std::string> outputs;
  json results = json::array();
  for (double nu : nus) {
    NaturalValues v = params_of(cfg, rc.params).values();
    v.nu_s = nu;
    rc.params = NaturalParams(v);
    const RateResult r = spatial_rate_check(rc);
    const fs::path p = output(c, "rate_nu_s_" + std::to_string(nu).substr(0, 4) + ".csv");
    auto out = open_out(p);
    write_rate_csv(out, r);
    outputs.push_back(p.string());
    results.push_back({{"nu_s", nu}, {"slope", r.slope}, {"expected", r.expected_slope}});
    std::cout << "nu_s=" << nu << " slope=" << r.slope << " expected=" << r.expected_slope << '\n';
  }
  finish(c, "rate-check", cfg, outputs, results);
  return 0;
}

int run_simulate(const Common& c) {
  const json cfg = load_config(c, "simulate");
  const RectangleDomain dom = domain_of(cfg);
  const TimeGrid grid = grid_of(cfg, 45);
  const NaturalParams p = params_of(cfg, NaturalParams(NaturalValues{1.0, 1.0, 1.0, 10.0, 0.25, 3.5, 0.35}));
  const auto M = get_or<std::size_t>(cfg, "/M", 1024);
  const auto n_locs = get_or<std::size_t>(cfg, "/n_locs", 250);
  const std::string method = get_or<std::string>(cfg, "/method", "exact");

  SyntheticData data = [&] {
    if (method == "exact") {
      return simulate_dataset(p, dom, M, grid, n_locs, get_or(cfg, "/loc_low", 0.2), get_or(cfg, "/loc_high", 0.8),
                              c.seed);
    }
    if (method != "statespace") throw std::runtime_error("method must be 'exact' or 'statespace'");
    // Same station and noise draws as the exact method, coefficients from the ARMA model.
    SyntheticData d = simulate_dataset(p, dom, std::min<std::size_t>(M, 1), grid, n_locs,
                                       get_or(cfg, "/loc_low", 0.2), get_or(cfg, "/loc_high", 0.8), c.seed);
    const BlockStateSpace ss = build_model(p, build_basis(dom, M), get_or(cfg, "/m", 1), grid);
    d.basis = ss.basis;
    d.coeffs = simulate_statespace(ss, grid, job_seed(c.seed, 0));
    const Eigen::MatrixXd field = field_at(d.coeffs.rightCols(grid.N), d.basis, d.obs.locations);
    std::mt19937_64 rng(job_seed(c.seed, 2));
    std::normal_distribution<double> noise(0.0, p.sigma_obs());
    for (long n = 0; n < grid.N; ++n) {
      for (auto& o : d.obs.steps[static_cast<std::size_t>(n)]) {
        o.value = field(static_cast<Eigen::Index>(o.loc), n) + noise(rng);
      }
    }
    return d;
  }();

  const fs::path po = output(c, "observations.csv");
  const fs::path pc = output(c, "coefficients.csv");
  const fs::path pf = output(c, "field.csv");
  {
    auto out = open_out(po);
    write_observations(out, data.obs);
  }
  {
    auto out = open_out(pc);
    write_coeff_paths_csv(out, data.coeffs);
  }
  {
    auto out = open_out(pf);
    write_field_csv(out, field_at(data.coeffs.rightCols(grid.N), data.basis, data.obs.locations), data.obs.locations);
  }
  finish(c, "simulate", cfg, {po.string(), pc.string(), pf.string()}, {{"params", to_json(p)}});
  return 0;
}

int run_fit(const Common& c) {
  const json cfg = load_config(c, "fit");
  const RectangleDomain dom = domain_of(cfg);
  const ObservationSet obs = observations_of(cfg, dom);
  const TimeGrid grid{get_or(cfg, "/dt", 1.0), obs.N()};
  const SpectralBasis b = build_basis(dom, get_or<std::size_t>(cfg, "/M", 64));
  const ModelKind kind = parse_model_kind(get_or<std::string>(cfg, "/model", "full"));
  NaturalParams init = params_from_json(cfg.value("init", json::object()),
                                        default_init(ols_fixed_effects(obs).residuals, dom, grid));
  std::vector<std::string> names;
  const FitResult fr =
      fit_two_step(obs, b, grid, init, FitConfig{kind, get_or(cfg, "/m", 1), optimizer_of(cfg, c.threads)}, &names);
  const fs::path p = output(c, "fit.json");
  json j = to_json(fr, names);
  j["model"] = to_string(kind);
  write_json_file(p.string(), j);
  std::cout << j["theta_hat"].dump() << "\nloglik " << fr.loglik << '\n';
  finish(c, "fit", cfg, {p.string()}, {{"loglik", fr.loglik}, {"converged", fr.converged}});
  return 0;
}

int run_filter_cmd(const Common& c) {
  const json cfg = load_config(c, "filter");
  const RectangleDomain dom = domain_of(cfg);
  const ObservationSet obs = observations_of(cfg, dom);
  const TimeGrid grid{get_or(cfg, "/dt", 1.0), obs.N()};
  const auto [theta, beta] = model_of(cfg);
  const BlockStateSpace ss = build_model(theta, build_basis(dom, get_or<std::size_t>(cfg, "/M", 64)),
                                         get_or(cfg, "/m", 1), grid);
  const std::vector<double> off = fixed_effect_offsets(obs, beta);
  const Eigen::MatrixXd H = design_matrix(ss.basis, obs.locations);

  const fs::path pf = output(c, "filtered.csv");
  const fs::path pp = output(c, "one_step.csv");
  auto out = open_out(pf);
  bool header = true;
  FilterOptions opts;
  opts.keep_means = false;
  opts.on_step = [&](const FilterStep& st) {
    write_prediction_csv(out, st.n, obs.locations, predict_field(ss, st.m_filt, st.S_filt, H, off), "filter", header);
    header = false;
  };
  const FilterOutput fo = run_filter(ss, obs, beta, theta.sigma_obs(), opts);
  auto po = open_out(pp);
  po << "step,x,y,value,yhat,sd\n";
  po.precision(17);
  for (const auto& r : fo.predictions) {
    const auto& s = obs.locations[r.loc];
    po << r.step << ',' << s[0] << ',' << s[1] << ',' << r.y << ',' << r.yhat << ',' << std::sqrt(r.a) << '\n';
  }
  std::cout << "loglik " << fo.loglik << " n_obs " << fo.n_obs << '\n';
  finish(c, "filter", cfg, {pf.string(), pp.string()}, {{"loglik", fo.loglik}, {"n_obs", fo.n_obs}});
  return 0;
}

int run_forecast(const Common& c) {
  const json cfg = load_config(c, "forecast");
  const RectangleDomain dom = domain_of(cfg);
  const ObservationSet obs = observations_of(cfg, dom);
  const TimeGrid grid{get_or(cfg, "/dt", 1.0), obs.N()};
  const auto [theta, beta] = model_of(cfg);
  const BlockStateSpace ss = build_model(theta, build_basis(dom, get_or<std::size_t>(cfg, "/M", 64)),
                                         get_or(cfg, "/m", 1), grid);
  const std::vector<Location> locs = locations_of(cfg, dom);
  std::vector<double> off;
  if (!beta.empty()) {
    if (beta.size() > 1) throw std::runtime_error("forecast at new locations supports an intercept-only beta");
    off.assign(locs.size(), beta[0]);
  }
  const FilterOutput fo = run_filter(ss, obs, beta, theta.sigma_obs(), FilterOptions{0, false, false, {}});
  const bool noise = get_or(cfg, "/include_noise", false);
  const FieldPrediction fp = forecast(ss, fo.final_mean, fo.final_cov, locs, off, theta.sigma_obs(), noise);
  const fs::path p = output(c, "forecast.csv");
  auto out = open_out(p);
  write_prediction_csv(out, obs.N() + 1, locs, fp, "forecast", true);
  finish(c, "forecast", cfg, {p.string()}, {{"loglik", fo.loglik}, {"step", obs.N() + 1}});
  return 0;
}

int run_simstudy(const Common& c) {
  const json cfg = load_config(c, "simstudy");
  SimStudyConfig sc;
  sc.replicates = get_or(cfg, "/replicates", sc.replicates);
  sc.N = get_or(cfg, "/N", sc.N);
  sc.M_sim = get_or(cfg, "/M_sim", sc.M_sim);
  sc.M_inf = get_or(cfg, "/M_inf", sc.M_inf);
  sc.n_locs = get_or(cfg, "/n_locs", sc.n_locs);
  sc.m = get_or(cfg, "/m", sc.m);
  sc.optimizer = optimizer_of(cfg, 1);
  sc.models = models_of(cfg, sc.models);
  if (get_or(cfg, "/full_scale", false)) sc.replicates = 30;
  if (cfg.contains("scenarios")) {
    const auto keep = cfg["scenarios"].get<std::vector<std::string>>();
    std::erase_if(sc.scenarios, [&](const Scenario& s) {
      return std::find(keep.begin(), keep.end(), s.label) == keep.end();
    });
  }
  const SimStudyResult r = simstudy(sc, c.seed, c.threads, [](const ReplicateResult& row) {
    std::cout << row.scenario << " r=" << row.replicate << ' ' << to_string(row.model)
              << (row.ok ? "" : " FAILED: " + row.error) << " beta_s=" << row.fit.theta_hat.beta_sep()
              << " forecast_crps=" << row.forecast.crps << " (" << row.seconds << " s)" << std::endl;
  });
  const fs::path pe = output(c, "simstudy_estimates.csv");
  const fs::path ps = output(c, "simstudy_scores.csv");
  {
    auto out = open_out(pe);
    write_simstudy_estimates_csv(out, sc, r);
  }
  {
    auto out = open_out(ps);
    write_simstudy_scores_csv(out, r);
  }
  json failures = json::array();
  for (const auto& row : r.rows) {
    if (!row.ok) failures.push_back({{"scenario", row.scenario}, {"replicate", row.replicate},
                                     {"model", to_string(row.model)}, {"error", row.error}});
  }
  finish(c, "simstudy", cfg, {pe.string(), ps.string()}, {{"failures", r.failures}, {"failed_jobs", failures}});
  return 0;
}

int run_cv(const Common& c) {
  const json cfg = load_config(c, "cv");
  const RectangleDomain dom = domain_of(cfg);
  const ObservationSet obs = observations_of(cfg, dom);
  const TimeGrid grid{get_or(cfg, "/dt", 1.0), obs.N()};
  CvConfig cc;
  cc.n_folds = get_or(cfg, "/folds", cc.n_folds);
  cc.block_size = get_or(cfg, "/block_size", cc.block_size);
  const std::string axis = get_or<std::string>(cfg, "/axis", "x");
  if (axis != "x" && axis != "y") throw std::runtime_error("axis must be 'x' or 'y'");
  cc.axis = axis == "x" ? StripeAxis::X : StripeAxis::Y;
  cc.M = get_or(cfg, "/M", cc.M);
  cc.m = get_or(cfg, "/m", cc.m);
  cc.simple_nu_s = get_or(cfg, "/simple_nu_s", cc.simple_nu_s);
  cc.models = models_of(cfg, cc.models);
  cc.optimizer = optimizer_of(cfg, 1);
  if (cfg.contains("init")) cc.init = params_from_json(cfg["init"], default_init(ols_fixed_effects(obs).residuals, dom, grid));
  const CvResult r = block_cv(obs, dom, grid, cc, c.threads);
  const fs::path p = output(c, "cv.csv");
  auto out = open_out(p);
  write_cv_csv(out, r);
  json summary = json::array();
  for (const auto& s : r.summary) {
    summary.push_back({{"model", to_string(s.model)}, {"filter_rmse", s.filter.rmse}, {"filter_crps", s.filter.crps},
                       {"forecast_rmse", s.forecast.rmse}, {"forecast_crps", s.forecast.crps}});
  }
  std::cout << summary.dump(2) << '\n';
  finish(c, "cv", cfg, {p.string()}, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral spatio-temporal Matern SPDE models: simulation, verification and inference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::vector<std::pair<CLI::App*, std::function<int(const Common&)>>> commands;
  std::vector<std::unique_ptr<Common>> commons;
  auto add = [&](const std::string& name, const std::string& help, std::function<int(const Common&)> run) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto c = std::make_unique<Common>();
    sub->add_option("-c,--config", c->config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out-dir", c->out_dir, "output directory");
    sub->add_option("--seed", c->seed, "random seed");
    sub->add_option("--threads", c->threads, "worker threads (0 = hardware concurrency)");
    commands.emplace_back(sub, std::move(run));
    commons.push_back(std::move(c));
    return std::pair<CLI::App*, Common*>{sub, commons.back().get()};
  };

  {
    auto [s, c] = add("basis", "write the leading Neumann eigenpairs", run_basis);
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
  }
  {
    auto [s, c] = add("verify-cov", "sup-norm covariance error of the ARMA approximation", run_verify);
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
    c->overrides.add<double>(s, "--nu-t-step", "/nu_t_step", "step of the nu_t sweep");
    c->overrides.add<std::vector<int>>(s, "--ms", "/ms", "rational orders");
  }
  {
    auto [s, c] = add("rate-check", "spatial truncation error against M", run_rate);
    c->overrides.add<std::vector<std::size_t>>(s, "--Ms", "/Ms", "ladder of basis sizes");
    c->overrides.add<std::vector<double>>(s, "--nu-s", "/nu_s", "spatial smoothness values");
  }
  {
    auto [s, c] = add("simulate", "simulate a field and noisy station observations", run_simulate);
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
    c->overrides.add<long>(s, "--N", "/N", "number of time steps");
    c->overrides.add<double>(s, "--dt", "/dt", "time step");
    c->overrides.add<std::size_t>(s, "--n-locs", "/n_locs", "number of stations");
    c->overrides.add<std::string>(s, "--method", "/method", "exact or statespace");
  }
  {
    auto [s, c] = add("fit", "two-step maximum likelihood fit", run_fit);
    c->overrides.add<std::string>(s, "--observations", "/observations", "observation CSV");
    c->overrides.add<std::string>(s, "--model", "/model", "full or simple");
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
    c->overrides.add<int>(s, "--m", "/m", "rational order");
    c->overrides.add<double>(s, "--dt", "/dt", "time step");
  }
  {
    auto [s, c] = add("filter", "Kalman filter with given parameters", run_filter_cmd);
    c->overrides.add<std::string>(s, "--observations", "/observations", "observation CSV");
    c->overrides.add<std::string>(s, "--fit-file", "/fit_file", "fit JSON with theta_hat and beta_hat");
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
    c->overrides.add<int>(s, "--m", "/m", "rational order");
  }
  {
    auto [s, c] = add("forecast", "one-step-ahead forecast after the last observed step", run_forecast);
    c->overrides.add<std::string>(s, "--observations", "/observations", "observation CSV");
    c->overrides.add<std::string>(s, "--fit-file", "/fit_file", "fit JSON with theta_hat and beta_hat");
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
    c->overrides.add<int>(s, "--grid-n", "/grid_n", "forecast grid nodes per side");
    c->overrides.add<bool>(s, "--include-noise", "/include_noise", "add sigma_obs^2 to the variance");
  }
  {
    auto [s, c] = add("simstudy", "simulation study of the Full and Simple models", run_simstudy);
    c->overrides.add<int>(s, "--replicates", "/replicates", "replicates per scenario");
    c->overrides.add<bool>(s, "--full-scale", "/full_scale", "30 replicates");
    c->overrides.add<std::vector<std::string>>(s, "--scenarios", "/scenarios", "subset of LL LH HL HH");
    c->overrides.add<int>(s, "--max-iter", "/optimizer/max_iter", "optimiser iteration cap");
  }
  {
    auto [s, c] = add("cv", "block cross-validation", run_cv);
    c->overrides.add<std::string>(s, "--observations", "/observations", "observation CSV");
    c->overrides.add<int>(s, "--folds", "/folds", "number of folds");
    c->overrides.add<double>(s, "--block-size", "/block_size", "stripe width");
    c->overrides.add<std::size_t>(s, "--M", "/M", "number of basis functions");
  }

  CLI11_PARSE(app, argc, argv);
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!commands[i].first->parsed()) continue;
    try {
      if (commons[i]->threads > 0) set_default_threads(commons[i]->threads);
      return commands[i].second(*commons[i]);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
