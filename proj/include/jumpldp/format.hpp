#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace jumpldp {

// 17 significant digits; "inf", "-inf" for infinities.
std::string fmt_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Numeric CSV with a header line. Empty cells are rejected.
CsvTable parse_csv(const std::string& text);
std::string csv_to_string(const CsvTable& table);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// JSON text where every floating value is printed with 17 significant digits
// and non-finite values become the strings "inf", "-inf", "nan".
std::string dump_json(const nlohmann::json& j, int indent = 2);

// {meta, rows} wrapper: rows become objects keyed by header names.
nlohmann::json csv_as_json(const CsvTable& table, const nlohmann::json& meta);

}  // namespace jumpldp
