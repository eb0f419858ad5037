#include "trajfuse/log.hpp"

#include <cstdlib>
#include <iostream>

namespace trajfuse {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("TRAJFUSE_LOG");
        if (!env) return LogLevel::info;
        const std::string v(env);
        if (v == "error") return LogLevel::error;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::info;
    }();
    return level;
}

void log_error(const std::string& msg) {
    std::cerr << "[error] " << msg << "\n";
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace trajfuse
