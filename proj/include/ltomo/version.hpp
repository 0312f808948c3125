#pragma once

namespace ltomo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ltomo
