#pragma once

#include <functional>
#include <string_view>

namespace outcome_forge {

using LogSink = std::function<void(std::string_view)>;

/// Replaces the warning sink (stderr by default); an empty function silences warnings.
/// Returns the previous sink.
LogSink set_log_sink(LogSink sink);

void log_warning(std::string_view message);

}  // namespace outcome_forge
