#include "grantnov/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "grantnov/error.hpp"

namespace grantnov {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot write file: " + path);
    out << text;
    if (!out) raise(ErrorCode::io, "write failed: " + path);
}

CsvTable CsvTable::read_file(const std::string& path) { return parse(read_text_file(path)); }

CsvTable CsvTable::parse(const std::string& text) {
    CsvTable t;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool any_field = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&]() {
        fields.push_back(field);
        field.clear();
        any_field = true;
    };
    auto end_record = [&]() {
        if (!any_field && fields.empty()) return; // skip blank lines
        end_field();
        if (t.header_.empty()) {
            t.header_ = fields;
        } else {
            t.rows_.push_back(CsvRow{record_line, fields});
        }
        fields.clear();
        any_field = false;
        field.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallow; \n handles the record break
        } else if (c == '\n') {
            end_record();
            ++line;
            record_line = line;
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) raise(ErrorCode::parse, "unterminated quoted field at end of input");
    if (any_field || !field.empty()) end_record();
    return t;
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
    std::string want = to_lower(trim(name));
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (to_lower(trim(header_[i])) == want) return i;
    }
    return std::nullopt;
}

CsvWriter::CsvWriter(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) raise(ErrorCode::io, "cannot write file: " + path);
    file_ = f;
}

CsvWriter::~CsvWriter() {
    if (file_) std::fclose(static_cast<std::FILE*>(file_));
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    std::FILE* f = static_cast<std::FILE*>(file_);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) std::fputc(',', f);
        std::string q = csv_quote(fields[i]);
        std::fwrite(q.data(), 1, q.size(), f);
    }
    std::fputc('\n', f);
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_double_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::optional<double> parse_double(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    const char* begin = t.data();
    const char* end = begin + t.size();
    double out = 0.0;
    auto [p, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return out;
}

std::optional<long long> parse_int(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    const char* begin = t.data();
    const char* end = begin + t.size();
    long long out = 0;
    auto [p, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return out;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace grantnov
