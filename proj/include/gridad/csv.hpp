#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace gridad {

/// Fixed 9-significant-digit rendering used by every CSV artifact.
std::string format_number(double value);

/// Writes to `<path>.tmp` and renames on close(), so a failed command never
/// leaves a partial file behind.
class CsvWriter {
public:
    explicit CsvWriter(std::string path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void comment(const std::string& text);
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    bool closed_ = false;
};

struct CsvTable {
    std::vector<std::string> comments;  // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;  // 1-based source line of each row

    int column(const std::string& name) const;  // -1 if absent
};

/// Reads a comma-separated file with '#' comment lines and a header row.
/// Throws DataError naming the offending line on ragged rows.
CsvTable read_csv(const std::string& path);

double parse_number(const std::string& cell, const std::string& path, int line);

/// Atomic JSON/text write with the same tmp-then-rename contract.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gridad
