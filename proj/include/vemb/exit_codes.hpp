#pragma once

#include "vemb/error.hpp"

namespace vemb {

/// Process exit codes of the vemb tool.
inline constexpr int exit_ok = 0;
inline constexpr int exit_internal = 1;
inline constexpr int exit_usage = 2;
/// Validation found cells that violate the regularity assumptions.
inline constexpr int exit_mesh_invalid = 3;

/// 10 + category: parse 11, topology 12, geometry 13, config 14, singular 15,
/// convergence 16, io 17, domain 18.
constexpr int exit_code(ErrorCategory c) noexcept { return 10 + static_cast<int>(c); }

}  // namespace vemb
