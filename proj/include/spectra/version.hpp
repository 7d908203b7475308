#pragma once

namespace spectra {

// Bumped whenever any numeric output can change; replay refuses to compare
// manifests across different versions.
inline constexpr const char* kVersion = "1.0.0";

}  // namespace spectra
