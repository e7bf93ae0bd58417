#pragma once

// CSV output (RFC-4180 quoting, '.' decimal separator, %.17g doubles so
// reruns are byte-identical).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace slowbond {

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
        write_row_strings(header);
    }

    void write_row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_quote(cells[i]);
        }
        out_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... vals) {
        std::vector<std::string> cells;
        (cells.push_back(to_cell(vals)), ...);
        write_row_strings(cells);
    }

    const std::filesystem::path& path() const { return path_; }

  private:
    static std::string to_cell(double v) { return csv_number(v); }
    static std::string to_cell(int v) { return std::to_string(v); }
    static std::string to_cell(long v) { return std::to_string(v); }
    static std::string to_cell(long long v) { return std::to_string(v); }
    static std::string to_cell(std::size_t v) { return std::to_string(v); }
    static std::string to_cell(const std::string& v) { return v; }
    static std::string to_cell(const char* v) { return v; }

    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace slowbond
