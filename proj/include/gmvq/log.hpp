#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gmvq {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Verbosity from the GMVQ_LOG environment variable (quiet|info|debug),
/// default info.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("GMVQ_LOG");
    if (!env) return LogLevel::kInfo;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::kQuiet;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
  if (log_level() >= LogLevel::kInfo) {
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
  }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
  if (log_level() >= LogLevel::kDebug) {
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
  }
}

}  // namespace gmvq
