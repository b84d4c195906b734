#pragma once

namespace binopt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace binopt
