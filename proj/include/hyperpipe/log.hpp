#pragma once

// Minimal leveled logging to stderr. 0 = warnings only, 1 = progress,
// 2 = debug detail.

#include <string>

namespace hyperpipe::log {

void set_verbosity(int level);
int verbosity();

void warn(const std::string& message);
void info(const std::string& message);
void debug(const std::string& message);

}  // namespace hyperpipe::log
