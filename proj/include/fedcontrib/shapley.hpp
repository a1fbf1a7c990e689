#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedcontrib/dataset.hpp"
#include "fedcontrib/json_io.hpp"
#include "fedcontrib/model.hpp"

namespace fedcontrib {

inline constexpr int kEnumerationCap = 15; // 2^15 subset evaluations per instance

// How the conditional expectation behind a coalition value is approximated:
// either substitute the per-feature reference vector (the medians) for the
// features outside the coalition, or average over sampled background rows.
struct BackgroundSpec {
    enum class Mode { reference_vector, sampled_background };

    Mode mode = Mode::reference_vector;
    std::vector<double> reference;            // length d
    std::vector<std::vector<double>> samples; // sampled_background rows

    static BackgroundSpec reference_vector(std::vector<double> reference);
    static BackgroundSpec from_medians(const Dataset& dataset);
    static BackgroundSpec sampled(const Dataset& dataset);
    static BackgroundSpec sampled(const Dataset& dataset, const std::vector<int>& rows);

    const char* mode_name() const;
};

struct ShapleyResult {
    int instance_id = -1;
    double prediction = 0.0;
    double baseline = 0.0; // value of the empty coalition (E[f] estimate)
    enum class Method { exact, monte_carlo };
    Method method = Method::exact;
    int iterations = 0; // M; 0 for exact
    std::uint64_t seed = 0;
    std::string background;
    std::vector<double> per_feature;

    // {instance_id, prediction, baseline, method, M, seed, values:[{feature,name,phi}]}
    Json to_json(const std::vector<std::string>& feature_names) const;
};

using PredictFn = std::function<double(std::span<const double>)>;

PredictFn predictor(const TrainedModel& model);

// Coalition influence: value of fixing the features in q to x's values while
// the rest follow the background convention, relative to the empty coalition.
double delta_q(const PredictFn& f, std::span<const double> x, const std::vector<int>& q,
               const BackgroundSpec& background);
double delta_q(const TrainedModel& model, std::span<const double> x, const std::vector<int>& q,
               const BackgroundSpec& background);

// Value of every coalition, indexed by bitmask over the d features. The
// single table backs exact Shapley values and the interaction index.
std::vector<double> coalition_values(const PredictFn& f, std::span<const double> x,
                                     const BackgroundSpec& background, int cap = kEnumerationCap);

// Exact Shapley values by full subset enumeration (d <= cap).
ShapleyResult shapley_exact(const PredictFn& f, std::span<const double> x,
                            const BackgroundSpec& background, int cap = kEnumerationCap);
ShapleyResult shapley_exact(const TrainedModel& model, std::span<const double> x,
                            const BackgroundSpec& background, int cap = kEnumerationCap);

// Monte-Carlo estimate of one feature's Shapley value. Each iteration draws
// a background row z (sampled mode; the reference vector stands in for z in
// reference mode) and a uniform feature permutation, then takes the marginal
// contribution of feature i between the two spliced instances.
double shapley_mc(const PredictFn& f, std::span<const double> x, int i, int iterations,
                  const BackgroundSpec& background, std::uint64_t seed);
double shapley_mc(const TrainedModel& model, std::span<const double> x, int i, int iterations,
                  const BackgroundSpec& background, std::uint64_t seed);
// Convenience matching the sampling description directly: z drawn from the
// dataset's rows.
double shapley_mc(const TrainedModel& model, std::span<const double> x, int i, int iterations,
                  const Dataset& dataset, std::uint64_t seed);

// Sum of member Shapley values for a feature group.
double shapley_group_sum(const ShapleyResult& result, const std::vector<int>& group);

// Combined extra effect of a feature group beyond its members' individual
// effects; zero for additive models and for singleton groups.
double interaction_index(const PredictFn& f, std::span<const double> x, const std::vector<int>& group,
                         const BackgroundSpec& background, int cap = kEnumerationCap);
double interaction_index(const TrainedModel& model, std::span<const double> x,
                         const std::vector<int>& group, const BackgroundSpec& background,
                         int cap = kEnumerationCap);

namespace detail {

// phi over all d features from a full coalition-value table.
std::vector<double> shapley_from_values(const std::vector<double>& values, int d);

// Shared Monte-Carlo core. eval(mask, z_index) returns the value of the
// coalition given by mask with background row z_index (-1 in reference
// mode). Draw order per iteration is fixed: background row first (sampled
// mode only), then the permutation.
double mc_marginal_mean(const std::function<double(std::uint64_t, int)>& eval, int d, int target,
                        int iterations, int background_count, std::uint64_t seed);

} // namespace detail

} // namespace fedcontrib
