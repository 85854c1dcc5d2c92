#include "bmsim/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace bmsim::log {

namespace {

Level from_env() {
  const char* env = std::getenv("BMSIM_LOG");
  if (env == nullptr) return Level::Info;
  if (std::strcmp(env, "error") == 0) return Level::Error;
  if (std::strcmp(env, "debug") == 0) return Level::Debug;
  return Level::Info;
}

Level g_threshold = from_env();

constexpr const char* tag(Level level) {
  switch (level) {
    case Level::Error: return "error";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return g_threshold; }
void set_threshold(Level level) { g_threshold = level; }

void write(Level level, std::string_view message) {
  std::fprintf(stderr, "[%s] %.*s\n", tag(level), static_cast<int>(message.size()),
               message.data());
}

}  // namespace bmsim::log
