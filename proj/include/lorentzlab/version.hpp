#pragma once

namespace lorentzlab {

inline constexpr const char* kVersion = "1.0.0";

// Bumped whenever the config or report layout changes incompatibly.
inline constexpr int kSchemaVersion = 1;

}  // namespace lorentzlab
