#include "jumpldp/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "jumpldp/errors.hpp"

namespace jumpldp {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        size_t a = s.find_first_not_of(" \t");
        size_t b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }
    return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(t.header.size()),
                             lineno, 1);
        std::vector<double> row;
        int col = 1;
        for (const auto& c : cells) {
            char* end = nullptr;
            double v = std::strtod(c.c_str(), &end);
            if (c.empty() || *end != '\0') throw ParseError("non-numeric cell '" + c + "'", lineno, col);
            row.push_back(v);
            col += static_cast<int>(c.size()) + 1;
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ValidationError("CSV has no header");
    return t;
}

std::string csv_to_string(const CsvTable& table) {
    std::ostringstream os;
    for (size_t j = 0; j < table.header.size(); ++j) os << (j ? "," : "") << table.header[j];
    os << "\n";
    for (const auto& row : table.rows) {
        for (size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << fmt_double(row[j]);
        os << "\n";
    }
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << content;
}

namespace {

void emit(const nlohmann::json& j, std::string& out, int indent, int depth) {
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                emit(it.value(), out, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool scalar = true;
            for (const auto& e : j)
                if (e.is_structured()) scalar = false;
            out += '[';
            for (size_t i = 0; i < j.size(); ++i) {
                if (i) out += scalar ? ", " : ",";
                if (!scalar) newline(depth + 1);
                emit(j[i], out, indent, depth + 1);
            }
            if (!scalar) newline(depth);
            out += ']';
            return;
        }
        case nlohmann::json::value_t::number_float: {
            double v = j.get<double>();
            out += std::isfinite(v) ? fmt_double(v) : "\"" + fmt_double(v) + "\"";
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    emit(j, out, indent, 0);
    out += '\n';
    return out;
}

nlohmann::json csv_as_json(const CsvTable& table, const nlohmann::json& meta) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json o = nlohmann::json::object();
        for (size_t j = 0; j < row.size(); ++j) o[table.header[j]] = row[j];
        rows.push_back(o);
    }
    return {{"meta", meta}, {"rows", rows}};
}

}  // namespace jumpldp
