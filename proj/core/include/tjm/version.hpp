#pragma once

namespace tjm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tjm
