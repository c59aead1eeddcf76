#pragma once

#include <string>
#include <vector>

#include "skembed/presets.hpp"

namespace skembed {

/// Every numeric report value is written with 12 significant digits.
std::string fmt12(double v);
/// v rounded to 12 significant digits, for JSON report fields.
double round12(double v);

/// Instance JSON:
///   {"name": str, "lattice": {"d", "h", "R_O", "shell_tol", "R_I"},
///    "alpha": num, "sense": "min"|"max",
///    "mu": [{"z": [int...], "m": num}...], "nu": [...]}
/// "name", "shell_tol", "R_I", "alpha" and "sense" are optional. Unknown keys and malformed
/// values raise ParseError with "origin:line: message".
Instance parse_instance(const std::string& text, const std::string& origin = "<instance>");
Instance read_instance(const std::string& path);
/// Masses are written at round-trip precision so that read_instance(write) is exact.
std::string instance_to_json(const Instance& instance);
void write_instance(const std::string& path, const Instance& instance);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// 1-based line of the first occurrence of `needle` in `text` (1 if absent).
std::size_t line_of(const std::string& text, const std::string& needle);
/// 1-based line containing byte offset `pos`.
std::size_t line_at(const std::string& text, std::size_t pos);

/// Minimal CSV builder; doubles go through fmt12.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    CsvTable& cell(const std::string& s);
    CsvTable& cell(double v);
    CsvTable& cell(long long v);
    CsvTable& cell(std::size_t v);
    void end_row();
    std::string str() const;
    std::size_t rows() const noexcept { return rows_; }

private:
    std::string out_;
    std::size_t columns_;
    std::size_t current_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace skembed
