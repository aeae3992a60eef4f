#pragma once

namespace epgf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace epgf
