#pragma once

// Minimal leveled logging: ORLICZ_FLOW_LOG={error,info,debug} selects the
// verbosity (default info).  Messages go to stderr and, when a sink file is
// installed (the CLI's run.log), there as well.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace orlicz_flow::logging {

enum class Level { error = 0, info = 1, debug = 2 };

inline Level level_from_env() {
  const char* env = std::getenv("ORLICZ_FLOW_LOG");
  if (env == nullptr) return Level::info;
  if (std::strcmp(env, "error") == 0) return Level::error;
  if (std::strcmp(env, "debug") == 0) return Level::debug;
  return Level::info;
}

inline Level& level() {
  static Level l = level_from_env();
  return l;
}

inline std::FILE*& sink() {
  static std::FILE* f = nullptr;
  return f;
}

inline void write(Level msg_level, const char* tag, const std::string& msg) {
  if (static_cast<int>(msg_level) <= static_cast<int>(level()))
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
  if (sink() != nullptr) {
    std::fprintf(sink(), "[%s] %s\n", tag, msg.c_str());
    std::fflush(sink());
  }
}

inline void error(const std::string& msg) { write(Level::error, "error", msg); }
inline void warn(const std::string& msg) { write(Level::info, "warning", msg); }
inline void info(const std::string& msg) { write(Level::info, "info", msg); }
inline void debug(const std::string& msg) { write(Level::debug, "debug", msg); }

}  // namespace orlicz_flow::logging
