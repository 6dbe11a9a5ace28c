#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spikes {

enum class Errc {
  invalid_parameter,
  model_error,
  fit_failure,
  coverage,
  subcritical_threshold,
  wrong_branch,
  must_declare_span,
  inconsistent_span,
  divergence,
  invalid_horizon,
  invalid_config,
  io_error,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_parameter: return "invalid_parameter";
    case Errc::model_error: return "model_error";
    case Errc::fit_failure: return "fit_failure";
    case Errc::coverage: return "coverage";
    case Errc::subcritical_threshold: return "subcritical_threshold";
    case Errc::wrong_branch: return "wrong_branch";
    case Errc::must_declare_span: return "must_declare_span";
    case Errc::inconsistent_span: return "inconsistent_span";
    case Errc::divergence: return "divergence";
    case Errc::invalid_horizon: return "invalid_horizon";
    case Errc::invalid_config: return "invalid_config";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace spikes
