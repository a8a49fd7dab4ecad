#pragma once

namespace vharvest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vharvest
