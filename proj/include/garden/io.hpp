#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "garden/error.hpp"

namespace garden::io {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open file: ", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    require(!in.bad(), "failed reading file: ", path);
    return std::move(buf).str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot write file: ", path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    require(out.good(), "failed writing file: ", path);
}

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    require(!ec, "cannot create directory: ", path, " (", ec.message(), ")");
}

} // namespace garden::io
