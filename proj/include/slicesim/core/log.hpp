#pragma once

#include <cstdlib>
#include <iostream>
#include <string_view>

namespace slicesim {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SLICESIM_LOG");
    std::string_view v = env ? env : "info";
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

inline void log_info(std::string_view msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[slicesim] " << msg << "\n";
}

inline void log_debug(std::string_view msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[slicesim] " << msg << "\n";
}

}  // namespace slicesim
