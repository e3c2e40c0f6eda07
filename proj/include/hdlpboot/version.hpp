#pragma once

namespace hdlpboot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hdlpboot
