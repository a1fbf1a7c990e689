#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fedcontrib {

enum class ColumnKind { integer, boolean, real };

const char* column_kind_name(ColumnKind kind);

// Parsed CSV contents before imputation/normalization. Cells are numeric or
// missing; the "?" token marks a missing value.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<ColumnKind> column_kinds;
    std::vector<std::vector<std::optional<double>>> rows;
    int target_column = -1;

    int column_count() const { return static_cast<int>(column_names.size()); }
    int row_count() const { return static_cast<int>(rows.size()); }
};

// Loads an RFC-4180-style CSV with a header row. Quoted fields (including
// embedded commas, escaped quotes and newlines) are supported; every data
// cell must be numeric or "?".
RawTable load_csv(const std::string& path, const std::string& target_column);

// Same parse applied to an in-memory buffer; load_csv is a thin file wrapper.
RawTable parse_csv(const std::string& content, const std::string& target_column,
                   const std::string& origin = "<memory>");

} // namespace fedcontrib
