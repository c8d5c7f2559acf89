#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kreinlab {

/// Bad input: parameters out of range, dimension mismatch, violated
/// preconditions. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Failure inside the numerical engine. Carries a machine-readable kind and
/// named scalar details (residual reached, offending bound, ...) so callers
/// can serialize a structured error. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using Detail = std::pair<std::string, double>;

  NumericalError(std::string kind, const std::string& message,
                 std::vector<Detail> details = {})
      : std::runtime_error(message), kind_(std::move(kind)), details_(std::move(details)) {}

  const std::string& kind() const noexcept { return kind_; }
  const std::vector<Detail>& details() const noexcept { return details_; }

 private:
  std::string kind_;
  std::vector<Detail> details_;
};

/// The singular form is infinite on the requested basis (functions with a
/// nonzero trace at the puncture).
class DivergentIntegralError : public NumericalError {
 public:
  explicit DivergentIntegralError(const std::string& message)
      : NumericalError("divergent_integral", message) {}
};

}  // namespace kreinlab
