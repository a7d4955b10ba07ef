#ifndef COALGENE_IO_UTIL_HPP
#define COALGENE_IO_UTIL_HPP

#include <optional>
#include <string>

namespace coalgene {

// 17 significant digits: round-trip safe for double.
std::string format_g17(double v);

// Writes via a temp file in the target directory followed by a rename.
void atomic_write_file(const std::string& path, const std::string& content);

// To the file when a path is given, otherwise to stdout.
void write_output(const std::optional<std::string>& path, const std::string& content);

// Verbosity from COALGENE_LOG: silent (default), info, debug.
bool log_enabled(int level); // 1 = info, 2 = debug
void log_line(int level, const std::string& msg);

} // namespace coalgene

#endif
