#pragma once

namespace benchcut {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace benchcut
