#include "fedcontrib/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>

#include "fedcontrib/errors.hpp"
#include "fedcontrib/json_io.hpp"

namespace fedcontrib {

namespace {

// Splits CSV content into records of fields. Handles quoted fields with
// escaped quotes ("") and newlines inside quotes; accepts both \n and \r\n.
std::vector<std::vector<std::string>> split_records(const std::string& content) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field.push_back(c);
            field_started = true;
            break;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field");
    if (!field.empty() || field_started || !fields.empty()) end_record();
    return records;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::optional<double> parse_cell(const std::string& raw, const std::string& origin,
                                 std::size_t line, std::size_t col) {
    const std::string cell = trimmed(raw);
    if (cell == "?") return std::nullopt;
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || cell.empty()) {
        throw DataError(origin + ": line " + std::to_string(line) + ", column " +
                        std::to_string(col + 1) + ": cell '" + cell +
                        "' is neither numeric nor '?'");
    }
    if (!std::isfinite(value)) {
        throw DataError(origin + ": line " + std::to_string(line) + ": non-finite value");
    }
    return value;
}

ColumnKind infer_kind(const std::vector<std::vector<std::optional<double>>>& rows, std::size_t col) {
    bool boolean = true;
    bool integral = true;
    for (const auto& row : rows) {
        const auto& cell = row[col];
        if (!cell) continue;
        const double v = *cell;
        if (v != 0.0 && v != 1.0) boolean = false;
        if (v != std::floor(v)) integral = false;
    }
    if (boolean) return ColumnKind::boolean;
    if (integral) return ColumnKind::integer;
    return ColumnKind::real;
}

} // namespace

const char* column_kind_name(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::integer: return "integer";
    case ColumnKind::boolean: return "boolean";
    case ColumnKind::real: return "real";
    }
    return "real";
}

RawTable parse_csv(const std::string& content, const std::string& target_column,
                   const std::string& origin) {
    const auto records = split_records(content);
    if (records.empty()) throw DataError(origin + ": no header");

    RawTable table;
    for (const auto& name : records[0]) table.column_names.push_back(trimmed(name));
    const std::size_t width = table.column_names.size();

    const auto it = std::find(table.column_names.begin(), table.column_names.end(),
                              trimmed(target_column));
    if (it == table.column_names.end()) {
        throw DataError(origin + ": target column '" + target_column + "' not in header");
    }
    table.target_column = static_cast<int>(it - table.column_names.begin());

    table.rows.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& record = records[r];
        if (record.size() == 1 && trimmed(record[0]).empty()) continue; // blank line
        if (record.size() != width) {
            throw DataError(origin + ": line " + std::to_string(r + 1) + " has " +
                            std::to_string(record.size()) + " cells, expected " +
                            std::to_string(width));
        }
        std::vector<std::optional<double>> row;
        row.reserve(width);
        for (std::size_t c = 0; c < width; ++c) {
            row.push_back(parse_cell(record[c], origin, r + 1, c));
        }
        table.rows.push_back(std::move(row));
    }

    table.column_kinds.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
        table.column_kinds.push_back(infer_kind(table.rows, c));
    }
    return table;
}

RawTable load_csv(const std::string& path, const std::string& target_column) {
    if (!std::filesystem::exists(path)) throw DataError("file not found: " + path);
    return parse_csv(read_text_file(path), target_column, path);
}

} // namespace fedcontrib
