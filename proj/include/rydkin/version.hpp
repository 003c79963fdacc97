#pragma once

namespace rydkin {
inline constexpr const char* code_version = "0.1.0";
}
