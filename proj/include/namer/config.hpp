#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "namer/assignment.hpp"
#include "namer/decode.hpp"

namespace namer {

struct Config {
  double epsilon = kDefaultEpsilon;
  int km = kDefaultKm;
  double lambda = kDefaultLambda;
  double alpha_l2r = kDefaultAlpha;
  double alpha_r2l = kDefaultAlpha;
  std::string vocab_path;
  std::uint64_t seed = 0;
};

/// JSON object with any subset of the Config field names. Unknown keys and
/// wrongly typed values throw BadConfig.
Config parse_config(const std::string& json_text, Config base = {});
Config read_config(const std::filesystem::path& path, Config base = {});
std::string to_json(const Config& config);

}  // namespace namer
