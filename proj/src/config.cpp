#include "namer/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "namer/error.hpp"

namespace namer {

namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  if (!j.is_number()) throw Error(Errc::BadConfig, std::string(key) + " must be a number");
  return j.get<double>();
}

}  // namespace

Config parse_config(const std::string& json_text, Config base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::BadConfig, e.what());
  }
  if (!j.is_object()) throw Error(Errc::BadConfig, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "epsilon") {
      base.epsilon = number(value, "epsilon");
    } else if (key == "lambda") {
      base.lambda = number(value, "lambda");
    } else if (key == "alpha_l2r") {
      base.alpha_l2r = number(value, "alpha_l2r");
    } else if (key == "alpha_r2l") {
      base.alpha_r2l = number(value, "alpha_r2l");
    } else if (key == "km") {
      if (!value.is_number_integer()) throw Error(Errc::BadConfig, "km must be an integer");
      base.km = value.get<int>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw Error(Errc::BadConfig, "seed must be a non-negative integer");
      base.seed = value.get<std::uint64_t>();
    } else if (key == "vocab_path") {
      if (!value.is_string()) throw Error(Errc::BadConfig, "vocab_path must be a string");
      base.vocab_path = value.get<std::string>();
    } else {
      throw Error(Errc::BadConfig, "unknown key " + key);
    }
  }
  return base;
}

Config read_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::string to_json(const Config& config) {
  json j;
  j["epsilon"] = config.epsilon;
  j["km"] = config.km;
  j["lambda"] = config.lambda;
  j["alpha_l2r"] = config.alpha_l2r;
  j["alpha_r2l"] = config.alpha_r2l;
  j["vocab_path"] = config.vocab_path;
  j["seed"] = config.seed;
  return j.dump(2);
}

}  // namespace namer
