#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedcontrib/csv.hpp"
#include "fedcontrib/json_io.hpp"

namespace fedcontrib {

// Per-feature affine map applied during normalization:
// normalized = (raw - offset) * scale. Zero-range columns use scale = 0.
struct AffineParams {
    double offset = 0.0;
    double scale = 1.0;
};

// Imputed, min-max normalized table with binary labels. `medians` is the
// per-feature reference vector in normalized space (attribution methods use
// it to represent a feature that is "turned off").
struct Dataset {
    int n = 0;
    int d = 0;
    std::vector<double> features; // row-major n x d, each value in [0, 1]
    std::vector<int> labels;      // 0/1
    std::vector<std::string> feature_names;
    std::vector<double> medians;
    std::vector<AffineParams> normalization;

    std::span<const double> row(int i) const {
        return std::span<const double>(features.data() + static_cast<std::size_t>(i) * d,
                                       static_cast<std::size_t>(d));
    }

    // Debug/cache snapshot: {feature_names, medians, n, d}.
    Json snapshot_json() const;

    // Content hash over features + labels; used to key derived artifacts.
    std::uint64_t content_hash() const;
};

struct HorizontalPartition {
    int party_count = 0;
    std::vector<std::vector<int>> assignments; // disjoint instance index sets
};

struct VerticalPartition {
    int party_count = 0;
    std::vector<std::vector<int>> feature_groups; // disjoint feature index sets
};

// Imputes missing cells with the column median (lower middle for even
// counts), min-max normalizes every feature to [0, 1], and maps the target
// to 0/1 labels. Rows with a missing target are dropped.
Dataset prepare(const RawTable& table, const std::string& target_column);

// Seeded shuffle dealt round-robin into k sets; sizes differ by at most one.
HorizontalPartition horizontal_split(const Dataset& dataset, int k, std::uint64_t seed);

// Contiguous feature blocks; the first (d mod g) groups get the extra column.
VerticalPartition vertical_split(const Dataset& dataset, int g);

// {0, 1, ..., n-1}; the default evaluation set for deletion diagnostics.
std::vector<int> all_indices(int n);

} // namespace fedcontrib
