#pragma once

namespace brmdd {
inline constexpr const char* kVersion = "0.1.0";
}
