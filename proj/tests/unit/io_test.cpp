#include "stmatern/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>

namespace stmatern {
namespace {

ObservationSet parse(const std::string& text, long n_steps = 0) {
  std::istringstream is(text);
  return read_observations(is, n_steps);
}

TEST(ReadObservations, StationsStepsAndGaps) {
  const auto obs = parse(
      "time,x,y,value,cov_elev\n"
      "1,0.1,0.2,1.5,10\n"
      "1,0.3,0.4,-2,20\n"
      "3,0.3,0.4,0.25,20\n"
      "3.0,0.1,0.2,7,10\n");
  ASSERT_EQ(obs.locations.size(), 2u);
  EXPECT_EQ(obs.locations[1], (Location{0.3, 0.4}));
  EXPECT_EQ(obs.N(), 3);
  EXPECT_EQ(obs.count(), 4u);
  EXPECT_TRUE(obs.steps[1].empty());
  ASSERT_EQ(obs.steps[2].size(), 2u);
  EXPECT_EQ(obs.steps[2][0].loc, 0u);
  EXPECT_EQ(obs.steps[2][0].value, 7.0);
  EXPECT_EQ(obs.covariate_names, std::vector<std::string>{"cov_elev"});
  EXPECT_EQ(obs.covariates(1, 0), 20.0);
  EXPECT_EQ(parse("time,x,y,value\n2,0,0,1\n", 5).N(), 5);
}

TEST(ReadObservations, RoundTrip) {
  const auto obs = parse(
      "time,x,y,value,cov_a,cov_b\n"
      "2,0.125,0.7,3.141592653589793,1,2\n"
      "1,0.9,0.1,-1e-7,3,4\n"
      "2,0.9,0.1,5,3,4\n");
  std::ostringstream os;
  write_observations(os, obs);
  const auto back = parse(os.str());
  EXPECT_EQ(back.N(), obs.N());
  EXPECT_EQ(back.covariate_names, obs.covariate_names);
  ASSERT_EQ(back.count(), obs.count());
  // Station indices follow first appearance, which writing by step may reorder.
  for (std::size_t n = 0; n < obs.steps.size(); ++n) {
    ASSERT_EQ(back.steps[n].size(), obs.steps[n].size());
    for (const auto& a : obs.steps[n]) {
      const auto it = std::find_if(back.steps[n].begin(), back.steps[n].end(), [&](const auto& b) {
        return back.locations[b.loc] == obs.locations[a.loc];
      });
      ASSERT_NE(it, back.steps[n].end());
      EXPECT_EQ(it->value, a.value);
      for (Eigen::Index c = 0; c < obs.covariates.cols(); ++c) {
        EXPECT_EQ(back.covariates(static_cast<Eigen::Index>(it->loc), c),
                  obs.covariates(static_cast<Eigen::Index>(a.loc), c));
      }
    }
  }
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "time,x,y,value,cov_a,cov_b");
}

TEST(ReadObservations, RejectsMalformedInput) {
  EXPECT_THROW(parse(""), std::invalid_argument);
  EXPECT_THROW(parse("t,x,y,value\n"), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value,elev\n"), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value\n1,0,0\n"), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value\n0,0,0,1\n"), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value\n1.5,0,0,1\n"), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value\n1,0,0,nan\n"), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value\n4,0,0,1\n", 3), std::invalid_argument);
  EXPECT_THROW(parse("time,x,y,value,cov_a\n1,0,0,1,2\n2,0,0,1,3\n"), std::invalid_argument);
  try {
    parse("time,x,y,value\n1,0,0,1\n1,0,0,2\n");
    FAIL() << "expected duplicate error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}

TEST(ParamsJson, RoundTripAndUnknownKey) {
  NaturalValues v;
  v.nu_t = 1.7;
  v.r_s = 0.3;
  v.sigma_obs = 0.2;
  const NaturalParams p(v);
  const auto back = params_from_json(to_json(p), NaturalParams(NaturalValues{}));
  EXPECT_EQ(back.nu_t(), 1.7);
  EXPECT_EQ(back.r_s(), 0.3);
  EXPECT_EQ(back.sigma_obs(), 0.2);
  const auto partial = params_from_json({{"sigma", 2.5}}, p);
  EXPECT_EQ(partial.sigma(), 2.5);
  EXPECT_EQ(partial.nu_t(), 1.7);
  EXPECT_THROW(params_from_json({{"kappa", 1.0}}, p), std::invalid_argument);
  EXPECT_THROW(params_from_json({{"sigma", "big"}}, p), std::invalid_argument);
  EXPECT_THROW(params_from_json({{"sigma", -1.0}}, p), std::invalid_argument);
  EXPECT_THROW(params_from_json(nlohmann::json::array(), p), std::invalid_argument);
}

TEST(DomainJson, RoundTrip) {
  const auto d2 = domain_from_json(to_json(RectangleDomain::rectangle(2.0, 3.0, -1.0, 0.5)));
  EXPECT_EQ(d2.dim, 2);
  EXPECT_EQ(d2.lengths[1], 3.0);
  EXPECT_EQ(d2.origin[0], -1.0);
  const auto d1 = domain_from_json(to_json(RectangleDomain::interval(4.0, 1.0)));
  EXPECT_EQ(d1.dim, 1);
  EXPECT_EQ(d1.lengths[0], 4.0);
  EXPECT_EQ(d1.origin[0], 1.0);
  EXPECT_THROW(domain_from_json({{"dim", 2}, {"lengths", {1.0}}}), std::invalid_argument);
}

TEST(ConfigHash, Fnv1aOfCompactDump) {
  EXPECT_EQ(config_hash(nlohmann::json::object()), "08f44b07b5901a25");
  EXPECT_EQ(config_hash({{"a", 1}}), "9c3e82dd6fcae8b1");
  EXPECT_NE(config_hash({{"a", 1}}), config_hash({{"a", 2}}));
}

TEST(RunManifest, RecordsProvenanceFields) {
  const nlohmann::json cfg{{"M", 64}};
  const auto m = run_manifest("fit", cfg, 42, {"fit.json"});
  for (const char* key : {"command", "version", "eigen", "compiler", "config_hash", "seed", "config", "outputs"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_EQ(m["command"], "fit");
  EXPECT_EQ(m["seed"], 42);
  EXPECT_EQ(m["config_hash"], config_hash(cfg));
  EXPECT_EQ(m["outputs"][0], "fit.json");
}

TEST(JsonFiles, MissingFileThrows) {
  EXPECT_THROW(read_json_file("/nonexistent/dir/cfg.json"), std::runtime_error);
  EXPECT_THROW(read_observations_file("/nonexistent/obs.csv"), std::runtime_error);
}

}  // namespace
}  // namespace stmatern
