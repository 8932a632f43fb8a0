// SPDX-License-Identifier: MIT
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace radner::csv {

/// %.17g: shortest text that still round-trips a double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// RFC-4180 style table writer: comma separated, LF line ends, fields quoted
/// only when they contain a comma, quote or newline.
class Writer {
public:
    explicit Writer(std::string header_row) { out_ += header_row + "\n"; }

    void add_row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ += ',';
            out_ += format_double(values[i]);
        }
        out_ += '\n';
    }

    const std::string& text() const { return out_; }

    void write_file(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << out_;
    }

private:
    std::string out_;
};

}  // namespace radner::csv
