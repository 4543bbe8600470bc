#pragma once

#include <stdexcept>
#include <string>

namespace sds {

/// Invalid model, policy or run configuration. `field()` names the offending
/// entry (e.g. "arrival.segments[1].mass") so the CLI can report it.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when the threshold finder sees no sign change between the
/// estimated success curve and the arrival CDF.
class NoCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sds
