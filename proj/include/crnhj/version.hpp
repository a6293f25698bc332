#pragma once

namespace crnhj {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace crnhj
