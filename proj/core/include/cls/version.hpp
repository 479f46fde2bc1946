#pragma once

namespace cls {
inline constexpr const char* version = "0.1.0";
}
