#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace monoselect {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace csv {

// 12 significant digits, locale-independent.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string num(std::int64_t v) { return std::to_string(v); }
inline std::string num(std::uint64_t v) { return std::to_string(v); }

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw IoError("cannot open output file: " + path);
    }

    void line(const std::string& text) {
        out_ << text << '\n';
        if (!out_) throw IoError("write failed: " + path_);
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failed: " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace csv
}  // namespace monoselect
