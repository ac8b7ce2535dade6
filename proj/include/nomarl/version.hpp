#pragma once

namespace nomarl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nomarl
