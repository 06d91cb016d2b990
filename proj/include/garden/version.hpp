#pragma once

namespace garden {

inline constexpr const char* kVersion = "0.1.0";

/// Version stamp written into every serialized model and report.
inline constexpr int kSchemaVersion = 1;

} // namespace garden
