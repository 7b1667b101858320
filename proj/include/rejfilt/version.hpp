#pragma once

namespace rejfilt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rejfilt
