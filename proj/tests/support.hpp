#pragma once

#include <fstream>
#include <sstream>
#include <string>

inline std::string fixture(const std::string& rel) { return std::string(HOMECTX_FIXTURES) + "/" + rel; }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
