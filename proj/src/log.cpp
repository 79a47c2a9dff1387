#include "outcome_forge/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace outcome_forge {

namespace {

std::mutex& sink_mutex() {
    static std::mutex mutex;
    return mutex;
}

LogSink& sink() {
    static LogSink current = [](std::string_view message) { std::cerr << "warning: " << message << '\n'; };
    return current;
}

}  // namespace

LogSink set_log_sink(LogSink next) {
    std::lock_guard lock(sink_mutex());
    return std::exchange(sink(), std::move(next));
}

void log_warning(std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

}  // namespace outcome_forge
