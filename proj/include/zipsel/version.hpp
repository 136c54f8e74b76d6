#pragma once

namespace zipsel {

inline constexpr const char* kToolName = "zipsel";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace zipsel
