#include "gridad/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "gridad/error.hpp"

namespace gridad {

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

CsvWriter::CsvWriter(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp") {
    out_.open(tmp_);
    if (!out_) throw DataError("cannot write '" + path_ + "'");
}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void CsvWriter::comment(const std::string& text) { out_ << '#' << text << '\n'; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw DataError("failed writing '" + path_ + "'");
    std::filesystem::rename(tmp_, path_);
    closed_ = true;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line.substr(1));
            continue;
        }
        auto cells = split(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw DataError(path + ":" + std::to_string(number) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
        table.line_numbers.push_back(number);
    }
    if (table.header.empty()) throw DataError(path + ": empty file");
    return table;
}

double parse_number(const std::string& cell, const std::string& path, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write '" + path + "'");
        out << text;
        if (!out) throw DataError("failed writing '" + path + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace gridad
