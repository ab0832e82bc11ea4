#pragma once

#include <functional>
#include <string_view>

namespace lumpkit {

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the warning sink (default: "warning: <msg>" on stderr). Returns
/// the previous handler. Not thread-safe; install once at startup.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

} // namespace lumpkit
