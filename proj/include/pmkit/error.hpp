#pragma once

#include <stdexcept>
#include <string>

namespace pmkit {

/// Classifies failures for exit-code mapping: validation errors are caller
/// mistakes (bad input, bad config), numeric errors are runtime failures of
/// an otherwise valid computation.
enum class ErrorKind { validation, numeric };

/**
 * Exception carrying a stable machine-readable code alongside the message.
 * Codes in use: invalid_params, invalid_config, parse_error, insufficient_data,
 * insufficient_history, insufficient_covariates, non_convergence,
 * instance_too_large, unknown_unit, numeric_error.
 */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error validation_error(std::string code, const std::string& what) {
  return Error(ErrorKind::validation, std::move(code), what);
}

inline Error numeric_error(std::string code, const std::string& what) {
  return Error(ErrorKind::numeric, std::move(code), what);
}

}  // namespace pmkit
