#include "reach/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace reach {

namespace {

std::mutex g_sink_mutex;

LogSink& sink() {
  static LogSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

LogSink set_warning_sink(LogSink new_sink) {
  std::lock_guard lock(g_sink_mutex);
  return std::exchange(sink(), std::move(new_sink));
}

void log_warning(std::string_view message) {
  std::lock_guard lock(g_sink_mutex);
  if (sink()) sink()(message);
}

}  // namespace reach
