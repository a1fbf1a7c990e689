#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fedcontrib/csv.hpp"
#include "fedcontrib/dataset.hpp"
#include "fedcontrib/errors.hpp"
#include "fedcontrib/model.hpp"
#include "fedcontrib/rng.hpp"
#include "fedcontrib/shapley.hpp"

using namespace fedcontrib;

namespace {

Dataset toy(const std::string& csv) { return prepare(parse_csv(csv, "y"), "y"); }

// Independent oracle: average marginal contribution over all d! orderings,
// evaluated straight from the definition (no subset-weight formula).
std::vector<double> permutation_oracle(const PredictFn& f, std::span<const double> x,
                                       const std::vector<double>& reference) {
    const int d = static_cast<int>(x.size());
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
    std::vector<double> point(reference);
    int count = 0;
    do {
        point = reference;
        double previous = f(point);
        for (int j : order) {
            point[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
            const double current = f(point);
            phi[static_cast<std::size_t>(j)] += current - previous;
            previous = current;
        }
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    for (auto& v : phi) v /= count;
    return phi;
}

Dataset kernel_fixture4() {
    return toy("a,b,c,d,y\n"
               "0.9,0.1,0.5,0.2,1\n"
               "0.8,0.3,0.1,0.9,1\n"
               "0.2,0.8,0.4,0.4,0\n"
               "0.1,0.9,0.9,0.1,0\n"
               "0.7,0.2,0.6,0.7,1\n"
               "0.3,0.7,0.2,0.8,0\n"
               "0.6,0.4,0.8,0.3,1\n"
               "0.4,0.6,0.3,0.6,0\n");
}

TrainedModel kernel_model(const Dataset& ds, double l2 = 0.1) {
    ModelConfig config;
    config.kind = ModelKind::kernel_rbf;
    config.l2_strength = l2;
    return train(ds, all_indices(ds.n), config);
}

} // namespace

TEST_CASE("delta_q basics") {
    const auto model = make_linear_oracle({1.0, 2.0}, 0.0);
    const auto background = BackgroundSpec::reference_vector({0.0, 0.0});
    const std::vector<double> x{1.0, 1.0};

    CHECK(delta_q(model, x, {}, background) == 0.0);
    CHECK(delta_q(model, x, {0, 1}, background) ==
          model.predict_proba(x) - model.predict_proba(background.reference));
    CHECK(delta_q(model, x, {1}, background) == 2.0);
    CHECK_THROWS_AS(delta_q(model, x, {7}, background), DataError);
}

TEST_CASE("delta_q sampled mode averages over background rows") {
    const auto ds = toy("a,b,y\n0,0,0\n1,0.5,1\n0.5,1,0\n1,1,1\n");
    const auto model = make_linear_oracle({1.0, 3.0}, 0.5);
    const auto background = BackgroundSpec::sampled(ds);
    const std::vector<double> x{1.0, 1.0};

    CHECK(delta_q(model, x, {}, background) == 0.0);

    // Hand-rolled expectation for Q = {0}: replace feature 1 by each row's value.
    double conditioned = 0.0, base = 0.0;
    for (int i = 0; i < ds.n; ++i) {
        conditioned += model.predict_proba(std::vector<double>{1.0, ds.row(i)[1]});
        base += model.predict_proba(ds.row(i));
    }
    CHECK(delta_q(model, x, {0}, background) ==
          doctest::Approx((conditioned - base) / ds.n).epsilon(1e-12));
}

TEST_CASE("exact shapley on the linear oracle is the situational importance") {
    const auto model = make_linear_oracle({1.0, 2.0}, 0.0);
    const auto background = BackgroundSpec::reference_vector({0.0, 0.0});
    const auto result = shapley_exact(model, std::vector<double>{1.0, 1.0}, background);

    CHECK(result.per_feature[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.per_feature[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(result.prediction == 3.0);
    CHECK(result.baseline == 0.0);
}

TEST_CASE("symmetric features with equal values get equal exact values") {
    const auto model = make_linear_oracle({1.0, 1.0}, 0.0);
    const auto background = BackgroundSpec::reference_vector({0.0, 0.0});
    const auto result = shapley_exact(model, std::vector<double>{1.0, 1.0}, background);
    CHECK(result.per_feature[0] == doctest::Approx(result.per_feature[1]).epsilon(1e-9));

    // Stronger case: kernel model trained on duplicated columns.
    const auto ds = toy("a,b,c,y\n0.2,0.2,0.9,0\n0.8,0.8,0.1,1\n0.5,0.5,0.6,0\n0.9,0.9,0.8,1\n");
    const auto km = kernel_model(ds);
    const auto result2 =
        shapley_exact(km, std::vector<double>{0.7, 0.7, 0.3}, BackgroundSpec::from_medians(ds));
    CHECK(result2.per_feature[0] == doctest::Approx(result2.per_feature[1]).epsilon(1e-9));
}

TEST_CASE("exact shapley matches the all-orderings oracle on a kernel model") {
    const auto ds = toy("a,b,c,y\n0.1,0.5,0.9,0\n0.9,0.4,0.2,1\n0.4,0.9,0.5,0\n0.8,0.1,0.7,1\n");
    const auto model = kernel_model(ds);
    const std::vector<double> x{0.6, 0.3, 0.8};
    const auto background = BackgroundSpec::from_medians(ds);

    const auto result = shapley_exact(model, x, background);
    const auto oracle = permutation_oracle(predictor(model), x, background.reference);
    for (int j = 0; j < 3; ++j) {
        CHECK(result.per_feature[static_cast<std::size_t>(j)] ==
              doctest::Approx(oracle[static_cast<std::size_t>(j)]).epsilon(1e-9));
    }

    // Efficiency in reference mode.
    const double total = shapley_group_sum(result, all_indices(3));
    CHECK(total == doctest::Approx(result.prediction - result.baseline).epsilon(1e-9));
}

TEST_CASE("dummy feature gets exactly zero") {
    const auto model = make_linear_oracle({3.0, 0.0, -1.5}, 0.25);
    const auto background = BackgroundSpec::reference_vector({0.2, 0.9, 0.4});
    const auto result = shapley_exact(model, std::vector<double>{0.8, 0.3, 0.6}, background);
    CHECK(std::fabs(result.per_feature[1]) <= 1e-12);
}

TEST_CASE("exact shapley is linear in the model") {
    const auto ds = kernel_fixture4();
    const auto f = kernel_model(ds, 0.2);
    const auto g = kernel_model(ds, 1.5);
    const std::vector<double> x{0.8, 0.2, 0.4, 0.7};
    const auto background = BackgroundSpec::from_medians(ds);
    const double a = 2.0, b = -0.5;

    const PredictFn combined = [&](std::span<const double> v) {
        return a * f.predict_proba(v) + b * g.predict_proba(v);
    };
    const auto phi_combined = shapley_exact(combined, x, background);
    const auto phi_f = shapley_exact(f, x, background);
    const auto phi_g = shapley_exact(g, x, background);
    for (int j = 0; j < 4; ++j) {
        CHECK(phi_combined.per_feature[static_cast<std::size_t>(j)] ==
              doctest::Approx(a * phi_f.per_feature[static_cast<std::size_t>(j)] +
                              b * phi_g.per_feature[static_cast<std::size_t>(j)])
                  .epsilon(1e-9));
    }
}

TEST_CASE("enumeration cap is enforced") {
    std::vector<double> x(16, 0.5);
    std::vector<double> w(16, 1.0);
    const auto model = make_linear_oracle(w, 0.0);
    const auto background = BackgroundSpec::reference_vector(std::vector<double>(16, 0.0));
    CHECK_THROWS_AS(shapley_exact(model, x, background), DataError);
    CHECK_THROWS_AS(interaction_index(model, x, {0, 1}, background), DataError);
}

TEST_CASE("monte-carlo handles wide models up to the 64-feature mask limit") {
    // 40 features is beyond exact enumeration but fine for MC.
    std::vector<double> w(40, 0.0);
    w[7] = 2.0;
    const auto model = make_linear_oracle(w, 0.0);
    std::vector<double> x(40, 1.0);
    const auto background = BackgroundSpec::reference_vector(std::vector<double>(40, 0.0));
    CHECK(shapley_mc(model, x, 7, 25, background, 3) == doctest::Approx(2.0).epsilon(1e-12));

    std::vector<double> huge(70, 0.0);
    const auto wide = make_linear_oracle(huge, 0.0);
    CHECK_THROWS_AS(shapley_mc(wide, std::vector<double>(70, 0.0), 0, 10,
                               BackgroundSpec::reference_vector(std::vector<double>(70, 0.0)), 1),
                    DataError);
}

TEST_CASE("monte-carlo: single-row background forces zero marginals") {
    // The only drawable z equals x, so every iteration splices identical
    // instances and the estimate is exactly zero.
    const auto ds = toy("a,b,y\n0,0,0\n1,1,1\n");
    const auto model = kernel_model(ds, 0.5);
    const std::vector<double> x{1.0, 1.0};
    const auto background = BackgroundSpec::sampled(ds, {1}); // row 1 == x
    CHECK(shapley_mc(model, x, 0, 100, background, 9) == 0.0);
}

TEST_CASE("monte-carlo estimate approaches the matching exact value") {
    const auto ds = kernel_fixture4();
    const auto model = kernel_model(ds);
    const std::vector<double> x{0.9, 0.1, 0.6, 0.3};
    const auto background = BackgroundSpec::sampled(ds);
    const auto exact = shapley_exact(model, x, background);

    const double estimate = shapley_mc(model, x, 0, 5000, background, 1234);
    CHECK(std::fabs(estimate - exact.per_feature[0]) < 0.05);
}

TEST_CASE("monte-carlo on the linear oracle nails the exact value under both modes") {
    // Additive model: every permutation yields the same marginal, so the
    // estimate equals the exact value for any M.
    const auto model = make_linear_oracle({1.0, 2.0}, 0.0);
    const std::vector<double> x{1.0, 1.0};

    const auto reference = BackgroundSpec::reference_vector({0.0, 0.0});
    CHECK(shapley_mc(model, x, 0, 7, reference, 5) == doctest::Approx(1.0).epsilon(1e-12));

    const auto ds = toy("a,b,y\n0,0,0\n1,1,1\n0.5,0,0\n");
    const auto sampled = BackgroundSpec::sampled(ds);
    const double estimate = shapley_mc(model, x, 1, 5000, sampled, 77);
    const auto exact = shapley_exact(model, x, sampled);
    CHECK(std::fabs(estimate - exact.per_feature[1]) < 0.05);
}

TEST_CASE("dataset overload draws z from the dataset rows") {
    const auto ds = kernel_fixture4();
    const auto model = kernel_model(ds);
    const std::vector<double> x{0.2, 0.8, 0.1, 0.9};
    CHECK(shapley_mc(model, x, 1, 300, ds, 42) ==
          shapley_mc(model, x, 1, 300, BackgroundSpec::sampled(ds), 42));

    Dataset empty;
    CHECK_THROWS_AS(shapley_mc(model, x, 1, 300, empty, 42), DataError);
}

TEST_CASE("monte-carlo is deterministic for a fixed seed and rejects M=0") {
    const auto ds = kernel_fixture4();
    const auto model = kernel_model(ds);
    const std::vector<double> x{0.2, 0.8, 0.1, 0.9};
    const auto background = BackgroundSpec::sampled(ds);

    CHECK(shapley_mc(model, x, 2, 500, background, 42) ==
          shapley_mc(model, x, 2, 500, background, 42));
    CHECK(shapley_mc(model, x, 2, 500, background, 42) !=
          shapley_mc(model, x, 2, 500, background, 43));
    CHECK_THROWS_AS(shapley_mc(model, x, 2, 0, background, 42), DataError);
}

TEST_CASE("monte-carlo error shrinks with M for most seeds") {
    const auto ds = kernel_fixture4();
    const auto model = kernel_model(ds);
    const std::vector<double> x{0.9, 0.1, 0.6, 0.3};
    const auto background = BackgroundSpec::sampled(ds);
    const auto exact = shapley_exact(model, x, background);

    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        double err_small = 0.0, err_large = 0.0;
        for (int j = 0; j < 4; ++j) {
            const double exact_j = exact.per_feature[static_cast<std::size_t>(j)];
            err_small += std::fabs(
                shapley_mc(model, x, j, 100, background, derive_stream(seed, 0, static_cast<std::uint64_t>(j))) - exact_j);
            err_large += std::fabs(
                shapley_mc(model, x, j, 10000, background, derive_stream(seed, 0, static_cast<std::uint64_t>(j))) - exact_j);
        }
        if (err_large < err_small) ++improved;
    }
    CHECK(improved >= 8);
}

TEST_CASE("group sums") {
    const auto model = make_linear_oracle({1.0, 2.0, 3.0}, 0.0);
    const auto background = BackgroundSpec::reference_vector({0.0, 0.0, 0.0});
    const auto result = shapley_exact(model, std::vector<double>{1.0, 1.0, 1.0}, background);

    CHECK(shapley_group_sum(result, {}) == 0.0);
    CHECK(shapley_group_sum(result, {0, 1}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(shapley_group_sum(result, all_indices(3)) ==
          doctest::Approx(result.prediction - result.baseline).epsilon(1e-9));
    CHECK_THROWS_AS(shapley_group_sum(result, {5}), DataError);
}

TEST_CASE("interaction index vanishes for additive models and singletons") {
    const auto model = make_linear_oracle({2.0, -1.0, 0.5}, 0.1);
    const auto background = BackgroundSpec::reference_vector({0.1, 0.2, 0.3});
    const std::vector<double> x{0.9, 0.8, 0.7};

    CHECK(std::fabs(interaction_index(model, x, {0, 1}, background)) <= 1e-9);
    CHECK(std::fabs(interaction_index(model, x, {0, 1, 2}, background)) <= 1e-9);
    CHECK(std::fabs(interaction_index(model, x, {1}, background)) <= 1e-12);

    const auto ds = kernel_fixture4();
    const auto km = kernel_model(ds);
    CHECK(std::fabs(interaction_index(km, std::vector<double>{0.5, 0.5, 0.5, 0.5}, {2},
                                      BackgroundSpec::from_medians(ds))) <= 1e-12);
}

TEST_CASE("interaction index is nonzero for a product model") {
    const PredictFn product = [](std::span<const double> v) { return v[0] * v[1]; };
    const auto background = BackgroundSpec::reference_vector({0.0, 0.0});
    const std::vector<double> x{1.0, 1.0};

    // Direct hand evaluation: only Q = {} contributes; weight 0!*1!/2! = 1/2,
    // delta = f(1,1) - f(1,0) - f(0,1) + f(0,0) = 1.
    const double value = interaction_index(product, x, {0, 1}, background);
    CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(interaction_index(product, x, {}, background), DataError);
}

TEST_CASE("shapley result serializes with the documented schema") {
    const auto model = make_linear_oracle({1.0, 2.0}, 0.0);
    const auto background = BackgroundSpec::reference_vector({0.0, 0.0});
    auto result = shapley_exact(model, std::vector<double>{1.0, 1.0}, background);
    result.instance_id = 17;
    result.seed = 42;

    const auto j = result.to_json({"alpha", "beta"});
    CHECK(j.at("instance_id") == 17);
    CHECK(j.at("method") == "exact");
    CHECK(j.at("M") == 0);
    CHECK(j.at("seed") == 42);
    CHECK(j.at("values").size() == 2);
    CHECK(j.at("values")[0].at("name") == "alpha");
    CHECK(j.at("values")[1].at("phi") == 2.0);
}
