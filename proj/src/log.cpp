#include "uavloc/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace uavloc {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Warn)};
std::mutex g_mutex;

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}
}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

void init_log_from_env() {
  const char* env = std::getenv("SSL_LOG_LEVEL");
  if (env == nullptr) return;
  const std::string v(env);
  if (v == "error") set_log_level(LogLevel::Error);
  else if (v == "warn") set_log_level(LogLevel::Warn);
  else if (v == "info") set_log_level(LogLevel::Info);
  else if (v == "debug") set_log_level(LogLevel::Debug);
}

void log_error(const std::string& msg) {
  if (log_level() >= LogLevel::Error) emit("error", msg);
}

void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::Warn) emit("warn", msg);
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) emit("debug", msg);
}

}  // namespace uavloc
