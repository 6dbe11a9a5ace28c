#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spikes/error.hpp"

namespace spikes {

/// Half-open time interval [begin, end) in milliseconds.
struct Horizon {
  double begin = 0.0;
  double end = 0.0;

  double length() const noexcept { return end - begin; }
  bool contains(double t) const noexcept { return t >= begin && t < end; }
  friend bool operator==(const Horizon&, const Horizon&) = default;
};

/// Strictly increasing event times inside a half-open horizon.
class SpikeTrain {
 public:
  SpikeTrain() = default;
  SpikeTrain(std::vector<double> times, Horizon horizon)
      : times_(std::move(times)), horizon_(horizon) {
    require(std::isfinite(horizon_.begin) && std::isfinite(horizon_.end) &&
                horizon_.length() > 0.0,
            Errc::invalid_parameter, "spike train horizon must have positive length");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      require(horizon_.contains(times_[i]), Errc::invalid_parameter,
              "spike time outside the half-open horizon");
      require(i == 0 || times_[i] > times_[i - 1], Errc::invalid_parameter,
              "spike times must be strictly increasing");
    }
  }

  const std::vector<double>& times() const noexcept { return times_; }
  const Horizon& horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double operator[](std::size_t i) const { return times_[i]; }

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

 private:
  std::vector<double> times_;
  Horizon horizon_{0.0, 1.0};
};

/// d spike trains sharing one horizon, with optional background rates.
class MultiTrain {
 public:
  MultiTrain() = default;
  explicit MultiTrain(std::vector<SpikeTrain> trains, std::vector<double> rates = {})
      : trains_(std::move(trains)), rates_(std::move(rates)) {
    for (const auto& tr : trains_) {
      require(tr.horizon() == trains_.front().horizon(), Errc::invalid_parameter,
              "all trains of a MultiTrain must share the same horizon");
    }
    require(rates_.empty() || rates_.size() == trains_.size(), Errc::invalid_parameter,
            "rates must be absent or one per train");
    for (double r : rates_) {
      require(r > 0.0 && std::isfinite(r), Errc::invalid_parameter, "background rates must be > 0");
    }
  }

  std::size_t dim() const noexcept { return trains_.size(); }
  const SpikeTrain& operator[](std::size_t i) const { return trains_[i]; }
  const std::vector<SpikeTrain>& trains() const noexcept { return trains_; }
  const std::vector<double>& rates() const noexcept { return rates_; }
  bool has_rates() const noexcept { return !rates_.empty(); }
  Horizon horizon() const {
    require(!trains_.empty(), Errc::invalid_parameter, "MultiTrain has no trains");
    return trains_.front().horizon();
  }
  std::size_t total_spikes() const {
    std::size_t n = 0;
    for (const auto& tr : trains_) n += tr.size();
    return n;
  }

  friend bool operator==(const MultiTrain&, const MultiTrain&) = default;

 private:
  std::vector<SpikeTrain> trains_;
  std::vector<double> rates_;
};

// Text format:
//   # horizon t0 t1 d
//   one line per train, ascending times separated by single spaces
//   (blank line = empty train)
// Numbers are written in shortest round-trip form, so write/read is exact.

inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline void write_text(std::ostream& os, const MultiTrain& mt) {
  const Horizon h = mt.horizon();
  os << "# horizon " << format_double(h.begin) << ' ' << format_double(h.end) << ' ' << mt.dim()
     << '\n';
  for (const auto& tr : mt.trains()) {
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i) os << ' ';
      os << format_double(tr[i]);
    }
    os << '\n';
  }
}

inline MultiTrain read_text(std::istream& is) {
  std::string line;
  std::optional<Horizon> horizon;
  std::size_t d = 0;
  // Skip provenance/comment lines until the horizon header.
  while (std::getline(is, line)) {
    if (line.rfind("# horizon", 0) == 0) {
      std::istringstream hs(line.substr(9));
      Horizon h;
      require(static_cast<bool>(hs >> h.begin >> h.end >> d), Errc::io_error,
              "malformed spike-train header: " + line);
      horizon = h;
      break;
    }
    require(line.empty() || line.front() == '#', Errc::io_error,
            "spike-train file must start with '# horizon t0 t1 d'");
  }
  require(horizon.has_value(), Errc::io_error, "missing '# horizon' header");
  std::vector<SpikeTrain> trains;
  trains.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::getline(is, line)) line.clear();
    std::vector<double> times;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [q, ec] = std::from_chars(p, end, v);
      require(ec == std::errc(), Errc::io_error, "malformed spike time in line " + std::to_string(i + 2));
      times.push_back(v);
      p = q;
    }
    trains.emplace_back(std::move(times), *horizon);
  }
  return MultiTrain(std::move(trains));
}

inline nlohmann::json to_json(const MultiTrain& mt) {
  nlohmann::json j;
  const Horizon h = mt.horizon();
  j["horizon"] = {h.begin, h.end};
  j["trains"] = nlohmann::json::array();
  for (const auto& tr : mt.trains()) j["trains"].push_back(tr.times());
  if (mt.has_rates()) j["rates"] = mt.rates();
  return j;
}

inline MultiTrain multitrain_from_json(const nlohmann::json& j) {
  try {
    const Horizon h{j.at("horizon").at(0).get<double>(), j.at("horizon").at(1).get<double>()};
    std::vector<SpikeTrain> trains;
    for (const auto& t : j.at("trains")) trains.emplace_back(t.get<std::vector<double>>(), h);
    std::vector<double> rates;
    if (j.contains("rates")) rates = j.at("rates").get<std::vector<double>>();
    return MultiTrain(std::move(trains), std::move(rates));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io_error, std::string("malformed spike-train JSON: ") + e.what());
  }
}

}  // namespace spikes
