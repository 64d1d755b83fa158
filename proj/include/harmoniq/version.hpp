#pragma once

namespace harmoniq {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace harmoniq
