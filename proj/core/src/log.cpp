#include "ipop/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace ipop {

namespace {

LogLevel parse_env_level() {
    const char* raw = std::getenv("IPOP_DISPATCH_LOG");
    if (raw == nullptr) {
        return LogLevel::Warn;
    }
    const std::string value(raw);
    if (value == "error") return LogLevel::Error;
    if (value == "warn") return LogLevel::Warn;
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

std::atomic<LogLevel>& level_slot() {
    static std::atomic<LogLevel> level{parse_env_level()};
    return level;
}

const char* level_tag(LogLevel level) {
    switch (level) {
        case LogLevel::Error: return "error";
        case LogLevel::Warn: return "warn";
        case LogLevel::Info: return "info";
        case LogLevel::Debug: return "debug";
    }
    return "?";
}

} // namespace

LogLevel log_level() { return level_slot().load(); }

void set_log_level(LogLevel level) { level_slot().store(level); }

void log(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) {
        return;
    }
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << level_tag(level) << "] " << message << "\n";
}

} // namespace ipop
