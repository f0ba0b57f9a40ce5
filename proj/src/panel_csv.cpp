#include "vofdi/panel.hpp"

#include "vofdi/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace vofdi::panel {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
std::optional<T> parse_number(std::string_view field) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

int parse_int(std::string_view field, const char* name, std::size_t line) {
    const auto v = parse_number<int>(field);
    if (!v) throw SchemaError(std::string(name) + ": expected an integer, got '" + std::string(field) + "'", line);
    return *v;
}

int parse_flag(std::string_view field, const char* name, std::size_t line) {
    const int v = parse_int(field, name, line);
    if (v != 0 && v != 1) throw SchemaError(std::string(name) + " must be 0 or 1", line);
    return v;
}

std::optional<double> parse_optional_double(std::string_view field, const char* name, std::size_t line) {
    if (field.empty()) return std::nullopt;
    const auto v = parse_number<double>(field);
    if (!v || !std::isfinite(*v)) {
        throw SchemaError(std::string(name) + ": expected a finite number, got '" + std::string(field) + "'", line);
    }
    return v;
}

// `lines[i]` is the file line of row i, or empty when rows did not come from a file.
void check_rows(const std::vector<PanelRow>& rows, const std::vector<std::size_t>& lines) {
    const auto line_of = [&](std::size_t i) { return lines.empty() ? 0 : lines[i]; };
    const auto where = [&](std::size_t i) {
        return lines.empty() ? " (row " + std::to_string(i + 1) + ")" : std::string();
    };
    std::map<std::string, std::vector<std::size_t>> by_firm;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.firm_id.empty()) throw SchemaError("empty firm_id" + where(i), line_of(i));
        if (r.group != 0 && r.group != 1) throw SchemaError("group must be 0 or 1" + where(i), line_of(i));
        if (r.ofdi != 0 && r.ofdi != 1) throw SchemaError("ofdi must be 0 or 1" + where(i), line_of(i));
        if (r.age && *r.age < 0) throw SchemaError("age must be nonnegative" + where(i), line_of(i));
        by_firm[r.firm_id].push_back(i);
    }
    for (auto& [firm, idx] : by_firm) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows[a].year < rows[b].year; });
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const auto& r = rows[idx[j]];
            if (r.group != rows[idx[0]].group) {
                throw SchemaError("firm " + firm + " changes group" + where(idx[j]), line_of(idx[j]));
            }
            if (j == 0) continue;
            const auto& prev = rows[idx[j - 1]];
            if (r.year == prev.year) {
                throw SchemaError("duplicate (firm_id, year) = (" + firm + ", " + std::to_string(r.year) + ")" +
                                      where(idx[j]),
                                  std::max(line_of(idx[j]), line_of(idx[j - 1])));
            }
            if (r.year != prev.year + 1) {
                throw SchemaError("firm " + firm + " has a gap between " + std::to_string(prev.year) + " and " +
                                      std::to_string(r.year) + where(idx[j]),
                                  line_of(idx[j]));
            }
            if (prev.ofdi == 1 && r.ofdi == 0) {
                throw SchemaError("ofdi is not absorbing for firm " + firm + ": 1 in " + std::to_string(prev.year) +
                                      " then 0 in " + std::to_string(r.year) + where(idx[j]),
                                  line_of(idx[j]));
            }
            if (prev.age && r.age && *r.age != *prev.age + 1) {
                throw SchemaError("age of firm " + firm + " does not increase by one per year" + where(idx[j]),
                                  line_of(idx[j]));
            }
        }
    }
}

}  // namespace

void validate_panel(const PanelData& panel) { check_rows(panel.rows, {}); }

void write_csv(const PanelData& panel, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : panel.rows) {
        if (r.firm_id.find_first_of(",\"\r\n") != std::string::npos) {
            throw InvalidArgument("firm_id '" + r.firm_id + "' cannot be written to CSV");
        }
        out << r.firm_id << ',' << r.group << ',' << r.year << ',' << r.ofdi << ',';
        if (r.size) out << format_double(*r.size);
        out << ',';
        if (r.roa) out << format_double(*r.roa);
        out << ',';
        if (r.age) out << *r.age;
        out << '\n';
    }
}

PanelData read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty file, expected header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw SchemaError("header must be '" + std::string(kCsvHeader) + "'", 1);

    PanelData panel;
    std::vector<std::size_t> lines;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 7) {
            throw SchemaError("expected 7 fields, found " + std::to_string(f.size()), lineno);
        }
        PanelRow r;
        r.firm_id = std::string(f[0]);
        if (r.firm_id.empty()) throw SchemaError("empty firm_id", lineno);
        r.group = parse_flag(f[1], "group", lineno);
        r.year = parse_int(f[2], "year", lineno);
        r.ofdi = parse_flag(f[3], "ofdi", lineno);
        r.size = parse_optional_double(f[4], "size", lineno);
        r.roa = parse_optional_double(f[5], "roa", lineno);
        if (!f[6].empty()) {
            r.age = parse_int(f[6], "age", lineno);
            if (*r.age < 0) throw SchemaError("age must be nonnegative", lineno);
        }
        panel.rows.push_back(std::move(r));
        lines.push_back(lineno);
    }
    check_rows(panel.rows, lines);
    return panel;
}

void export_csv(const PanelData& panel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_csv(panel, out);
    out.flush();
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

PanelData import_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_csv(in);
}

}  // namespace vofdi::panel
