#pragma once

namespace cgbench {

inline constexpr const char* kToolName = "cgbench";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cgbench
