#include "coalgene/io_util.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace coalgene {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.parent_path().empty() ? fs::path(".")
                                                      : target.parent_path();
    fs::create_directories(dir);
    const fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write to " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

void write_output(const std::optional<std::string>& path, const std::string& content) {
    if (path) {
        atomic_write_file(*path, content);
        log_line(1, "wrote " + *path);
    } else {
        std::cout << content;
    }
}

namespace {
int log_level_from_env() {
    const char* v = std::getenv("COALGENE_LOG");
    if (!v) return 0;
    if (std::strcmp(v, "debug") == 0) return 2;
    if (std::strcmp(v, "info") == 0) return 1;
    return 0;
}
} // namespace

bool log_enabled(int level) {
    static const int env_level = log_level_from_env();
    return env_level >= level;
}

void log_line(int level, const std::string& msg) {
    if (log_enabled(level)) std::cerr << "[coalgene] " << msg << "\n";
}

} // namespace coalgene
