#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "spikes/error.hpp"
#include "spikes/intensity.hpp"
#include "spikes/spike_train.hpp"

namespace spikes {

inline constexpr std::string_view kVersion = "1.0.0";

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// Run identity embedded in every artifact: version, seed, the full resolved
/// config and its hash (over the compact JSON dump, keys sorted).
struct Provenance {
  nlohmann::json config;
  std::uint64_t seed = 0;

  std::string config_hash() const { return hex64(fnv1a(config.dump())); }
  nlohmann::json to_json() const {
    return {{"version", std::string(kVersion)}, {"seed", seed}, {"config_hash", config_hash()}, {"config", config}};
  }
  /// Comment lines for CSV and spike-train text outputs.
  std::string header() const {
    return "# spikes " + std::string(kVersion) + " seed=" + std::to_string(seed) + " config_hash=" + config_hash() +
           "\n# config " + config.dump() + "\n";
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::io_error, "cannot write '" + path + "'");
  out << text;
  require(static_cast<bool>(out), Errc::io_error, "write failed for '" + path + "'");
}

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, what + ": " + e.what());
  }
}

/// Loads spike trains from the text format or its JSON mirror (by extension).
inline MultiTrain load_trains(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return multitrain_from_json(parse_json(text, path));
  std::istringstream is(text);
  return read_text(is);
}

inline nlohmann::json to_json(const SmoothNonneg& f) {
  const BSpline& g = f.spline();
  return {{"degree", g.degree()}, {"breakpoints", g.breakpoints()}, {"coefs", g.coefs()}, {"floor", f.floor()},
          {"q0", f.smoothness().q0}, {"q1", f.smoothness().q1}};
}

inline SmoothNonneg smooth_nonneg_from_json(const nlohmann::json& j) {
  try {
    BSpline g(j.at("degree").get<int>(), j.at("breakpoints").get<std::vector<double>>(),
              j.at("coefs").get<std::vector<double>>());
    Smoothness sm{j.value("q0", 1), j.value("q1", 1.0)};
    return SmoothNonneg(std::move(g), j.value("floor", 0.0), sm, j.value("kappa", std::vector<double>{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("malformed function spec: ") + e.what());
  }
}

/// Model file: {"deadtime": theta, "s": {...}, "r": {...}}.
inline nlohmann::json to_json(const IntensityPair& m) {
  return {{"deadtime", m.deadtime()}, {"s", to_json(m.s())}, {"r", to_json(m.r())}};
}

inline IntensityPair intensity_pair_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("s") && j.contains("r"), Errc::invalid_config, "model needs s and r");
  return IntensityPair(smooth_nonneg_from_json(j.at("s")), smooth_nonneg_from_json(j.at("r")),
                       j.value("deadtime", 0.0));
}

}  // namespace spikes
