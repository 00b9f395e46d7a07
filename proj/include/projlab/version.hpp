#pragma once

namespace projlab {
inline constexpr const char* version_string = "0.3.0";
}
