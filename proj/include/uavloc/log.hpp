#pragma once

#include <string>

namespace uavloc {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level();
void set_log_level(LogLevel level);

// Reads SSL_LOG_LEVEL (error|warn|info|debug); unknown values keep the
// current level.
void init_log_from_env();

void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace uavloc
