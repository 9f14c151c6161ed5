#pragma once

#include "stmatern/inference.hpp"
#include "stmatern/kalman.hpp"
#include "stmatern/params.hpp"
#include "stmatern/rational.hpp"
#include "stmatern/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stmatern {

inline constexpr const char* kVersion = "0.1.0";

/// Parses `time,x,y,value[,cov_*...]`. time is the step index n >= 1;
/// stations are the distinct (x, y) pairs in order of first appearance and
/// covariates must be constant per station. N is the largest step unless
/// n_steps > 0 is given. Throws std::invalid_argument with the offending line.
ObservationSet read_observations(std::istream& is, long n_steps = 0);
ObservationSet read_observations_file(const std::string& path, long n_steps = 0);

/// Writes rows ordered by step then station; the inverse of read_observations.
void write_observations(std::ostream& os, const ObservationSet& obs);

nlohmann::json to_json(const NaturalParams& p);
/// Missing keys keep the values of base. Throws std::invalid_argument on
/// unknown keys or invalid values.
NaturalParams params_from_json(const nlohmann::json& j, const NaturalParams& base);

nlohmann::json to_json(const FitResult& r, const std::vector<std::string>& beta_names);
nlohmann::json to_json(const RationalApprox& ra);
nlohmann::json to_json(const RectangleDomain& dom);
RectangleDomain domain_from_json(const nlohmann::json& j);

/// Throws std::runtime_error when the file cannot be read or parsed.
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// 64-bit FNV-1a of the compact serialisation of j, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// {command, version, eigen, compiler, config_hash, seed, config, outputs}.
nlohmann::json run_manifest(const std::string& command, const nlohmann::json& config,
                            std::uint64_t seed, const std::vector<std::string>& outputs);

}  // namespace stmatern
