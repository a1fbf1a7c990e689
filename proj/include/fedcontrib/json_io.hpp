#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedcontrib {

using Json = nlohmann::ordered_json;

// Canonical rounding for report values: 10 decimal digits, -0 folded to +0.
// Reports pass every float through this so re-runs are byte-identical and
// diffs stay readable. Model artifacts keep full precision and skip it.
double round10(double v);

// round10 applied element-wise.
std::vector<double> round10(const std::vector<double>& v);

// Serializes with 2-space indent and a trailing newline.
void write_json_file(const std::string& path, const Json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a over raw bytes; the fingerprint/config-hash primitive.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xCBF29CE484222325ULL);
std::string to_hex(std::uint64_t v);

} // namespace fedcontrib
