#pragma once

#include <fmt/core.h>

#include <string_view>

namespace bmsim::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Current threshold. Initialised from the BMSIM_LOG environment variable
// (error | info | debug, default info); can be overridden at runtime.
Level threshold();
void set_threshold(Level level);

void write(Level level, std::string_view message);

template <typename... Args>
void error(fmt::format_string<Args...> fstr, Args&&... args) {
  if (threshold() >= Level::Error)
    write(Level::Error, fmt::format(fstr, std::forward<Args>(args)...));
}

template <typename... Args>
void info(fmt::format_string<Args...> fstr, Args&&... args) {
  if (threshold() >= Level::Info)
    write(Level::Info, fmt::format(fstr, std::forward<Args>(args)...));
}

template <typename... Args>
void debug(fmt::format_string<Args...> fstr, Args&&... args) {
  if (threshold() >= Level::Debug)
    write(Level::Debug, fmt::format(fstr, std::forward<Args>(args)...));
}

}  // namespace bmsim::log
