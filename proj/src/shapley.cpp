#include "fedcontrib/shapley.hpp"

#include <bit>
#include <cmath>

#include "fedcontrib/errors.hpp"
#include "fedcontrib/rng.hpp"

namespace fedcontrib {

namespace {

void check_cap(int d, int cap) {
    if (d > cap) {
        throw DataError("feature count " + std::to_string(d) +
                        " exceeds the enumeration cap of " + std::to_string(cap));
    }
    if (d <= 0) throw DataError("feature count must be positive");
}

void check_length(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw DataError(std::string(what) + " has length " + std::to_string(got) +
                        ", expected " + std::to_string(expected));
    }
}

void check_mask_width(int d) {
    if (d > 64) {
        throw DataError("coalition masking supports at most 64 features, got " + std::to_string(d));
    }
}

std::uint64_t mask_of(const std::vector<int>& q, int d) {
    check_mask_width(d);
    std::uint64_t mask = 0;
    for (int i : q) {
        if (i < 0 || i >= d) throw DataError("feature index " + std::to_string(i) + " out of range");
        mask |= std::uint64_t{1} << i;
    }
    return mask;
}

void splice(std::span<const double> x, std::uint64_t mask, std::span<const double> background,
            std::vector<double>& out) {
    const int d = static_cast<int>(x.size());
    out.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        out[static_cast<std::size_t>(j)] =
            (mask >> j) & 1u ? x[static_cast<std::size_t>(j)] : background[static_cast<std::size_t>(j)];
    }
}

// q!(d-1-q)!/d! for q = 0..d-1. Factorials up to 15! are exact in double.
std::vector<double> subset_weights(int d) {
    std::vector<double> fact(static_cast<std::size_t>(d) + 1, 1.0);
    for (int i = 1; i <= d; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
    std::vector<double> w(static_cast<std::size_t>(d), 0.0);
    for (int q = 0; q < d; ++q) {
        w[static_cast<std::size_t>(q)] =
            fact[static_cast<std::size_t>(q)] * fact[static_cast<std::size_t>(d - 1 - q)] / fact[static_cast<std::size_t>(d)];
    }
    return w;
}

} // namespace

BackgroundSpec BackgroundSpec::reference_vector(std::vector<double> reference) {
    BackgroundSpec b;
    b.mode = Mode::reference_vector;
    b.reference = std::move(reference);
    return b;
}

BackgroundSpec BackgroundSpec::from_medians(const Dataset& dataset) {
    return reference_vector(dataset.medians);
}

BackgroundSpec BackgroundSpec::sampled(const Dataset& dataset) {
    return sampled(dataset, all_indices(dataset.n));
}

BackgroundSpec BackgroundSpec::sampled(const Dataset& dataset, const std::vector<int>& rows) {
    if (rows.empty()) throw DataError("sampled background requires at least one row");
    BackgroundSpec b;
    b.mode = Mode::sampled_background;
    b.samples.reserve(rows.size());
    for (int i : rows) {
        if (i < 0 || i >= dataset.n) throw DataError("background row index out of range");
        const auto row = dataset.row(i);
        b.samples.emplace_back(row.begin(), row.end());
    }
    return b;
}

const char* BackgroundSpec::mode_name() const {
    return mode == Mode::reference_vector ? "reference_vector" : "sampled_background";
}

Json ShapleyResult::to_json(const std::vector<std::string>& feature_names) const {
    Json j;
    j["instance_id"] = instance_id;
    j["prediction"] = round10(prediction);
    j["baseline"] = round10(baseline);
    j["method"] = method == Method::exact ? "exact" : "monte_carlo";
    j["M"] = iterations;
    j["seed"] = seed;
    j["background"] = background;
    Json values = Json::array();
    for (std::size_t i = 0; i < per_feature.size(); ++i) {
        Json v;
        v["feature"] = i;
        v["name"] = i < feature_names.size() ? feature_names[i] : ("f" + std::to_string(i));
        v["phi"] = round10(per_feature[i]);
        values.push_back(std::move(v));
    }
    j["values"] = std::move(values);
    return j;
}

PredictFn predictor(const TrainedModel& model) {
    return [&model](std::span<const double> x) { return model.predict_proba(x); };
}

double delta_q(const PredictFn& f, std::span<const double> x, const std::vector<int>& q,
               const BackgroundSpec& background) {
    const int d = static_cast<int>(x.size());
    const std::uint64_t mask = mask_of(q, d);
    std::vector<double> buffer;
    if (background.mode == BackgroundSpec::Mode::reference_vector) {
        check_length(x.size(), background.reference.size(), "reference vector");
        splice(x, mask, background.reference, buffer);
        return f(buffer) - f(background.reference);
    }
    double conditioned = 0.0;
    double base = 0.0;
    for (const auto& z : background.samples) {
        check_length(x.size(), z.size(), "background row");
        splice(x, mask, z, buffer);
        conditioned += f(buffer);
        base += f(z);
    }
    const double count = static_cast<double>(background.samples.size());
    return conditioned / count - base / count;
}

double delta_q(const TrainedModel& model, std::span<const double> x, const std::vector<int>& q,
               const BackgroundSpec& background) {
    return delta_q(predictor(model), x, q, background);
}

std::vector<double> coalition_values(const PredictFn& f, std::span<const double> x,
                                     const BackgroundSpec& background, int cap) {
    const int d = static_cast<int>(x.size());
    check_cap(d, cap);
    const std::size_t count = std::size_t{1} << d;
    std::vector<double> values(count, 0.0);
    std::vector<double> buffer;

    if (background.mode == BackgroundSpec::Mode::reference_vector) {
        check_length(x.size(), background.reference.size(), "reference vector");
        for (std::size_t mask = 0; mask < count; ++mask) {
            splice(x, static_cast<std::uint64_t>(mask), background.reference, buffer);
            values[mask] = f(buffer);
        }
        return values;
    }

    if (background.samples.empty()) throw DataError("sampled background has no rows");
    for (const auto& z : background.samples) {
        check_length(x.size(), z.size(), "background row");
        for (std::size_t mask = 0; mask < count; ++mask) {
            splice(x, static_cast<std::uint64_t>(mask), z, buffer);
            values[mask] += f(buffer);
        }
    }
    const double count_z = static_cast<double>(background.samples.size());
    for (auto& v : values) v /= count_z;
    return values;
}

ShapleyResult shapley_exact(const PredictFn& f, std::span<const double> x,
                            const BackgroundSpec& background, int cap) {
    const int d = static_cast<int>(x.size());
    const auto values = coalition_values(f, x, background, cap);

    ShapleyResult result;
    result.method = ShapleyResult::Method::exact;
    result.iterations = 0;
    result.background = background.mode_name();
    result.per_feature = detail::shapley_from_values(values, d);
    result.baseline = values.front();
    result.prediction = f(x);
    return result;
}

ShapleyResult shapley_exact(const TrainedModel& model, std::span<const double> x,
                            const BackgroundSpec& background, int cap) {
    return shapley_exact(predictor(model), x, background, cap);
}

double shapley_mc(const PredictFn& f, std::span<const double> x, int i, int iterations,
                  const BackgroundSpec& background, std::uint64_t seed) {
    const int d = static_cast<int>(x.size());
    if (i < 0 || i >= d) throw DataError("feature index " + std::to_string(i) + " out of range");

    std::vector<double> buffer;
    if (background.mode == BackgroundSpec::Mode::reference_vector) {
        check_length(x.size(), background.reference.size(), "reference vector");
        auto eval = [&](std::uint64_t mask, int) {
            splice(x, mask, background.reference, buffer);
            return f(buffer);
        };
        return detail::mc_marginal_mean(eval, d, i, iterations, 0, seed);
    }

    if (background.samples.empty()) throw DataError("sampled background has no rows");
    for (const auto& z : background.samples) check_length(x.size(), z.size(), "background row");
    auto eval = [&](std::uint64_t mask, int z_index) {
        splice(x, mask, background.samples[static_cast<std::size_t>(z_index)], buffer);
        return f(buffer);
    };
    return detail::mc_marginal_mean(eval, d, i, iterations,
                                    static_cast<int>(background.samples.size()), seed);
}

double shapley_mc(const TrainedModel& model, std::span<const double> x, int i, int iterations,
                  const BackgroundSpec& background, std::uint64_t seed) {
    return shapley_mc(predictor(model), x, i, iterations, background, seed);
}

double shapley_mc(const TrainedModel& model, std::span<const double> x, int i, int iterations,
                  const Dataset& dataset, std::uint64_t seed) {
    if (dataset.n == 0) throw DataError("dataset supplies no background rows");
    return shapley_mc(model, x, i, iterations, BackgroundSpec::sampled(dataset), seed);
}

double shapley_group_sum(const ShapleyResult& result, const std::vector<int>& group) {
    double sum = 0.0;
    for (int i : group) {
        if (i < 0 || static_cast<std::size_t>(i) >= result.per_feature.size()) {
            throw DataError("feature index " + std::to_string(i) + " out of range");
        }
        sum += result.per_feature[static_cast<std::size_t>(i)];
    }
    return sum;
}

double interaction_index(const PredictFn& f, std::span<const double> x, const std::vector<int>& group,
                         const BackgroundSpec& background, int cap) {
    const int d = static_cast<int>(x.size());
    if (group.empty()) throw DataError("interaction index requires a non-empty group");
    const std::uint64_t group_mask = mask_of(group, d);
    const auto values = coalition_values(f, x, background, cap);
    const auto weights = subset_weights(d);
    const double group_size = static_cast<double>(group.size());

    // Sum over coalitions disjoint from the group of the weighted extra
    // effect: joint value minus individual member values plus the correction
    // for counting the base coalition |group| times.
    const std::uint64_t full = (std::uint64_t{1} << d) - 1;
    const std::uint64_t outside = full & ~group_mask;
    double total = 0.0;
    // Enumerate submasks of `outside` (plus the empty set).
    std::uint64_t q = 0;
    for (;;) {
        // Baselines cancel, so the delta reduces to raw coalition values:
        // v[Q u P] - sum_i v[Q u {i}] + (|P| - 1) v[Q].
        double delta = values[q | group_mask] + (group_size - 1.0) * values[q];
        for (int i : group) delta -= values[q | (std::uint64_t{1} << i)];
        total += weights[static_cast<std::size_t>(std::popcount(q))] * delta;
        if (q == outside) break;
        q = (q - outside) & outside; // next submask
    }
    return total;
}

double interaction_index(const TrainedModel& model, std::span<const double> x,
                         const std::vector<int>& group, const BackgroundSpec& background, int cap) {
    return interaction_index(predictor(model), x, group, background, cap);
}

namespace detail {

std::vector<double> shapley_from_values(const std::vector<double>& values, int d) {
    const auto weights = subset_weights(d);
    const std::size_t count = std::size_t{1} << d;
    if (values.size() != count) throw NumericError("coalition value table has wrong size");

    std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        double sum = 0.0;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            if (mask & bit) continue;
            sum += weights[static_cast<std::size_t>(std::popcount(mask))] *
                   (values[mask | bit] - values[mask]);
        }
        phi[static_cast<std::size_t>(i)] = sum;
    }
    return phi;
}

double mc_marginal_mean(const std::function<double(std::uint64_t, int)>& eval, int d, int target,
                        int iterations, int background_count, std::uint64_t seed) {
    if (iterations < 1) throw DataError("iteration count must be at least 1");
    check_mask_width(d);
    Rng rng(seed);
    std::vector<int> order(static_cast<std::size_t>(d));
    double sum = 0.0;
    for (int m = 0; m < iterations; ++m) {
        const int z = background_count > 0 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(background_count))) : -1;
        for (int j = 0; j < d; ++j) order[static_cast<std::size_t>(j)] = j;
        rng.shuffle(order);

        // Features preceding the target in the permutation keep x's values,
        // everything after it comes from the background; the pair of
        // evaluations differs only in where the target itself comes from.
        std::uint64_t mask = 0;
        for (int j : order) {
            if (j == target) break;
            mask |= std::uint64_t{1} << j;
        }
        const double with_target = eval(mask | (std::uint64_t{1} << target), z);
        const double without_target = eval(mask, z);
        sum += with_target - without_target;
    }
    return sum / static_cast<double>(iterations);
}

} // namespace detail

} // namespace fedcontrib
