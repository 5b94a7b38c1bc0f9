#include "vemb/error.hpp"

namespace vemb {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::topology: return "topology";
    case ErrorCategory::geometry: return "geometry";
    case ErrorCategory::config: return "config";
    case ErrorCategory::singular: return "singular";
    case ErrorCategory::convergence: return "convergence";
    case ErrorCategory::io: return "io";
    case ErrorCategory::domain: return "domain";
  }
  return "unknown";
}

Error::Error(ErrorCategory category, const std::string& what)
    : std::runtime_error(std::string(to_string(category)) + " error: " + what), category_(category) {}

}  // namespace vemb
