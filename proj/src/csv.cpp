#include "fairiv/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fairiv {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& path, std::size_t line,
                    const std::string& field) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        fail_at(path, line, "cannot parse '" + field + "' as a number");
    return value;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            table.header = split_fields(line);
            continue;
        }
        if (line.empty() || line == "\r")
            continue;
        auto fields = split_fields(line);
        if (fields.size() != table.header.size())
            fail_at(path, lineno,
                    "expected " + std::to_string(table.header.size()) +
                        " fields, got " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty())
        throw std::runtime_error(path + ":1: missing header row");
    return table;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp);
        out << text;
        out.flush();
        if (!out)
            throw std::runtime_error("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void write_csv_atomic(const std::string& path, const CsvTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        out << (c ? "," : "") << table.header[c];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("csv row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

Sample read_sample(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expected = {"y", "z", "s", "w"};
    if (table.header != expected)
        throw std::runtime_error(path + ":1: expected header y,z,s,w");

    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    Sample sample;
    sample.y.resize(n);
    sample.z.resize(n, 1);
    sample.s.resize(n);
    sample.w.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const std::size_t lineno = static_cast<std::size_t>(i) + 2;
        sample.y(i) = parse_double(path, lineno, row[0]);
        sample.z(i, 0) = parse_double(path, lineno, row[1]);
        const double s = parse_double(path, lineno, row[2]);
        if (s != 0.0 && s != 1.0)
            fail_at(path, lineno, "s must be 0 or 1, got '" + row[2] + "'");
        sample.s(i) = s;
        sample.w(i, 0) = parse_double(path, lineno, row[3]);
    }
    return sample;
}

void write_sample(const std::string& path, const Sample& sample) {
    CsvTable table;
    table.header = {"y", "z", "s", "w"};
    table.rows.reserve(static_cast<std::size_t>(sample.n()));
    for (Eigen::Index i = 0; i < sample.n(); ++i)
        table.rows.push_back({format_double(sample.y(i)),
                              format_double(sample.z(i, 0)),
                              format_double(sample.s(i)),
                              format_double(sample.w(i, 0))});
    write_csv_atomic(path, table);
}

}  // namespace fairiv
