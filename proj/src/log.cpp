#include "s3kf/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace s3kf {

LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("S3KF_LOG");
    if (env == nullptr) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[s3kf %s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace s3kf
