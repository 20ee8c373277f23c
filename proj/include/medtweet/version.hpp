#pragma once

namespace medtweet {

inline constexpr const char* kToolName = "medtweet";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace medtweet
