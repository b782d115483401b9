#pragma once

namespace copulacp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace copulacp
