#pragma once

#include <stdexcept>
#include <string>

namespace msform {

/// Invalid configuration, arguments, or geometric input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Carries the offending 1-based line (0 if not line-specific).
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t line, const std::string& source = {})
      : ConfigError(format(what, line, source)), detail_(what), line_(line) {}

  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  static std::string format(const std::string& what, std::size_t line, const std::string& source) {
    std::string msg = source.empty() ? std::string{} : source + ": ";
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    return msg + what;
  }

  std::string detail_;
  std::size_t line_;
};

/// A value left the domain of a formula at runtime (e.g. non-positive mass).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace msform
