#include "fedcontrib/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "fedcontrib/errors.hpp"
#include "fedcontrib/rng.hpp"

namespace fedcontrib {

namespace {

// Imputation fill: conventional median, midpoint of the two central values
// for even counts.
double median_midpoint(std::vector<double> values) {
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

// Reference vector: lower-middle order statistic, so the "feature off" value
// is always one the column actually attains.
double median_lower(std::vector<double> values) {
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    return values[mid];
}

} // namespace

Json Dataset::snapshot_json() const {
    Json j;
    j["feature_names"] = feature_names;
    j["medians"] = round10(medians);
    j["n"] = n;
    j["d"] = d;
    return j;
}

std::uint64_t Dataset::content_hash() const {
    std::uint64_t h = fnv1a64(features.data(), features.size() * sizeof(double));
    h = fnv1a64(labels.data(), labels.size() * sizeof(int), h);
    return h;
}

Dataset prepare(const RawTable& table, const std::string& target_column) {
    const auto it = std::find(table.column_names.begin(), table.column_names.end(), target_column);
    if (it == table.column_names.end()) {
        throw DataError("target column '" + target_column + "' not present");
    }
    const int target = static_cast<int>(it - table.column_names.begin());

    // Rows with a missing target are dropped: labels must be ground truth.
    std::vector<int> kept;
    for (int r = 0; r < table.row_count(); ++r) {
        if (table.rows[r][static_cast<std::size_t>(target)]) kept.push_back(r);
    }
    if (kept.empty()) throw DataError("no rows with a target value");

    Dataset ds;
    ds.n = static_cast<int>(kept.size());
    ds.d = table.column_count() - 1;
    if (ds.d == 0) throw DataError("no feature columns");

    ds.labels.reserve(kept.size());
    for (int r : kept) {
        const double y = *table.rows[r][static_cast<std::size_t>(target)];
        if (y != 0.0 && y != 1.0) {
            throw DataError("target column must be binary 0/1, found " + std::to_string(y));
        }
        ds.labels.push_back(y == 1.0 ? 1 : 0);
    }
    if (std::count(ds.labels.begin(), ds.labels.end(), 1) == 0 ||
        std::count(ds.labels.begin(), ds.labels.end(), 0) == 0) {
        throw DataError("target column is constant");
    }

    for (int c = 0; c < table.column_count(); ++c) {
        if (c != target) ds.feature_names.push_back(table.column_names[static_cast<std::size_t>(c)]);
    }

    ds.features.assign(static_cast<std::size_t>(ds.n) * ds.d, 0.0);
    ds.normalization.resize(static_cast<std::size_t>(ds.d));
    ds.medians.resize(static_cast<std::size_t>(ds.d));

    int f = 0;
    for (int c = 0; c < table.column_count(); ++c) {
        if (c == target) continue;
        std::vector<double> present;
        present.reserve(kept.size());
        for (int r : kept) {
            const auto& cell = table.rows[r][static_cast<std::size_t>(c)];
            if (cell) present.push_back(*cell);
        }
        if (present.empty()) {
            throw DataError("feature column '" + table.column_names[static_cast<std::size_t>(c)] +
                            "' has no values");
        }
        const double fill = median_midpoint(present);

        std::vector<double> column;
        column.reserve(kept.size());
        double lo = fill, hi = fill;
        for (int r : kept) {
            const auto& cell = table.rows[r][static_cast<std::size_t>(c)];
            const double v = cell ? *cell : fill;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            column.push_back(v);
        }

        AffineParams params;
        params.offset = lo;
        params.scale = hi > lo ? 1.0 / (hi - lo) : 0.0; // constant column -> all zeros
        ds.normalization[static_cast<std::size_t>(f)] = params;

        for (int i = 0; i < ds.n; ++i) {
            const double v = (column[static_cast<std::size_t>(i)] - params.offset) * params.scale;
            ds.features[static_cast<std::size_t>(i) * ds.d + f] = v;
        }

        std::vector<double> normalized(column.size());
        for (std::size_t i = 0; i < column.size(); ++i) {
            normalized[i] = (column[i] - params.offset) * params.scale;
        }
        ds.medians[static_cast<std::size_t>(f)] = median_lower(std::move(normalized));
        ++f;
    }
    return ds;
}

HorizontalPartition horizontal_split(const Dataset& dataset, int k, std::uint64_t seed) {
    if (k <= 0) throw DataError("party count must be positive");
    if (k > dataset.n) {
        throw DataError("party count " + std::to_string(k) + " exceeds instance count " +
                        std::to_string(dataset.n));
    }
    std::vector<int> order = all_indices(dataset.n);
    Rng rng(derive_stream(seed, 0x686F727AULL, static_cast<std::uint64_t>(k)));
    rng.shuffle(order);

    HorizontalPartition part;
    part.party_count = k;
    part.assignments.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < dataset.n; ++i) {
        part.assignments[static_cast<std::size_t>(i % k)].push_back(order[static_cast<std::size_t>(i)]);
    }
    for (auto& set : part.assignments) std::sort(set.begin(), set.end());
    return part;
}

VerticalPartition vertical_split(const Dataset& dataset, int g) {
    if (g <= 0) throw DataError("group count must be positive");
    if (g > dataset.d) {
        throw DataError("group count " + std::to_string(g) + " exceeds feature count " +
                        std::to_string(dataset.d));
    }
    VerticalPartition part;
    part.party_count = g;
    part.feature_groups.resize(static_cast<std::size_t>(g));
    const int base = dataset.d / g;
    const int extra = dataset.d % g;
    int next = 0;
    for (int p = 0; p < g; ++p) {
        const int size = base + (p < extra ? 1 : 0);
        for (int j = 0; j < size; ++j) part.feature_groups[static_cast<std::size_t>(p)].push_back(next++);
    }
    return part;
}

std::vector<int> all_indices(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

} // namespace fedcontrib
