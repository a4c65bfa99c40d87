#pragma once
// Minimal CSV reading/writing: comma-separated, UTF-8, double-quote escaping,
// header row required. Enough for the artifact formats used here.

#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace pansig {

struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name, -1 if absent.
    int col(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_col(std::string_view name) const {
        const int i = col(name);
        if (i < 0)
            throw DataError(source + ": missing required column '" + std::string(name) + "'");
        return i;
    }
};

namespace detail {

// Splits one logical CSV record starting at the current stream position.
// Handles quoted fields (embedded commas, doubled quotes, embedded newlines).
inline bool read_record(std::istream& in, std::vector<std::string>& out,
                        const std::string& source, std::size_t line_no) {
    out.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool in_quotes = false;
    while (true) {
        if (c == EOF) {
            if (in_quotes)
                throw DataError(source + ": line " + std::to_string(line_no) +
                                ": unterminated quoted field");
            break;
        }
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
    out.push_back(std::move(field));
    return true;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in, std::string source = "<stream>") {
    CsvTable t;
    t.source = std::move(source);
    std::vector<std::string> record;
    std::size_t line_no = 1;
    if (!detail::read_record(in, record, t.source, line_no))
        throw DataError(t.source + ": empty file (header row required)");
    t.header = record;
    while (detail::read_record(in, record, t.source, ++line_no)) {
        if (record.size() == 1 && record[0].empty()) continue;  // blank line
        if (record.size() != t.header.size())
            throw DataError(t.source + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(record.size()));
        t.rows.push_back(record);
    }
    return t;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return read_csv(in, path.string());
}

inline std::string csv_escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot write file: " + path.string());
        path_ = path.string();
    }

    void row(std::span<const std::string> fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << '\n';
    }

    void row(std::initializer_list<std::string> fields) {
        row(std::span<const std::string>(fields.begin(), fields.size()));
    }

    void close() {
        out_.close();
        if (!out_) throw DataError("write failed: " + path_);
    }

  private:
    std::ofstream out_;
    std::string path_;
};

}  // namespace pansig
