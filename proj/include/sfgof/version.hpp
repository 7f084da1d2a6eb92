#pragma once

namespace sfgof {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sfgof
