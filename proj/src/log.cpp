#include "hyperpipe/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace hyperpipe::log {

namespace {

std::atomic<int> g_level{0};
std::mutex g_mutex;

void emit(const char* tag, const std::string& message) {
  std::lock_guard lock(g_mutex);
  std::cerr << "[hyperpipe " << tag << "] " << message << '\n';
}

}  // namespace

void set_verbosity(int level) { g_level = level; }
int verbosity() { return g_level; }

void warn(const std::string& message) { emit("warn", message); }

void info(const std::string& message) {
  if (g_level >= 1) emit("info", message);
}

void debug(const std::string& message) {
  if (g_level >= 2) emit("debug", message);
}

}  // namespace hyperpipe::log
