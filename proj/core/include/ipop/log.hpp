#pragma once

#include <string>

namespace ipop {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Current threshold. Initialized once from the IPOP_DISPATCH_LOG
/// environment variable (error|warn|info|debug); defaults to warn.
LogLevel log_level();

void set_log_level(LogLevel level);

/// Writes "[level] message" to stderr when `level` is at or below the
/// current threshold.
void log(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log(LogLevel::Error, m); }
inline void log_warn(const std::string& m) { log(LogLevel::Warn, m); }
inline void log_info(const std::string& m) { log(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log(LogLevel::Debug, m); }

} // namespace ipop
