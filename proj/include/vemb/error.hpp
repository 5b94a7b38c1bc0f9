#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vemb {

/// Named failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  parse = 1,
  topology,
  geometry,
  config,
  singular,
  convergence,
  io,
  domain,
};

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what);

  [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace vemb
