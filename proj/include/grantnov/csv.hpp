#ifndef GRANTNOV_CSV_HPP
#define GRANTNOV_CSV_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace grantnov {

// One parsed CSV record along with the 1-based line number it started on.
struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// RFC 4180-style CSV table: quoted fields, "" escapes, CR/LF tolerant.
class CsvTable {
  public:
    static CsvTable read_file(const std::string& path);
    static CsvTable parse(const std::string& text);

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<CsvRow>& rows() const { return rows_; }

    // case-insensitive header lookup; nullopt when absent
    std::optional<std::size_t> column(const std::string& name) const;

  private:
    std::vector<std::string> header_;
    std::vector<CsvRow> rows_;
};

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void write_row(const std::vector<std::string>& fields);

  private:
    void* file_;
};

std::string csv_quote(const std::string& field);

// locale-free numeric formatting/parsing used for every file we emit
std::string format_double(double v);       // %.17g, round-trip exact
std::string format_double_short(double v); // %.10g, for report tables
std::optional<double> parse_double(const std::string& s);
std::optional<long long> parse_int(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string to_lower(std::string s);
std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

} // namespace grantnov

#endif
