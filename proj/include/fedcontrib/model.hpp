#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedcontrib/dataset.hpp"
#include "fedcontrib/json_io.hpp"

namespace fedcontrib {

enum class ModelKind {
    logistic,   // L2-regularized logistic regression, full-batch gradient descent
    kernel_rbf, // RBF-kernel regularized least squares on +-1 labels, logistic link
    linear_raw, // raw-score linear model; least-squares trainer and analytic oracle
};

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelConfig {
    ModelKind kind = ModelKind::kernel_rbf;
    double l2_strength = 1.0;
    double rbf_gamma = 0.0; // <= 0 resolves to 1/d at training time
    int max_iterations = 500;
    double tolerance = 1e-8;
    std::uint64_t seed = 0;

    Json to_json() const;
    static ModelConfig from_json(const Json& j);
};

// Immutable fitted model. Training is a pure function of (data subset,
// config): deterministic initialization and closed-form or fixed-budget
// optimization, so retraining on identical inputs reproduces identical
// parameters. Deletion diagnostics depend on that contract.
class TrainedModel {
public:
    // Probability of the positive class in [0, 1]; raw score for linear_raw.
    double predict_proba(std::span<const double> x) const;

    ModelKind kind() const { return kind_; }
    const ModelConfig& config() const { return config_; }
    int feature_count() const { return d_; }
    double gamma() const { return gamma_; } // resolved RBF coefficient (kernel_rbf)
    const std::string& fingerprint() const { return fingerprint_; }
    const std::vector<double>& parameters() const { return parameters_; }

    Json to_json() const;
    static TrainedModel from_json(const Json& j);

    static TrainedModel linear(std::vector<double> weights, double bias);
    static TrainedModel logistic(const ModelConfig& config, int d, std::vector<double> weights_bias,
                                 std::string fingerprint);
    static TrainedModel kernel(const ModelConfig& config, int d, double gamma,
                               std::vector<double> alpha, std::vector<double> support,
                               std::string fingerprint);

private:
    TrainedModel() = default;

    ModelKind kind_ = ModelKind::linear_raw;
    ModelConfig config_;
    int d_ = 0;
    int n_support_ = 0;   // kernel_rbf only
    double gamma_ = 0.0;  // kernel_rbf only (resolved value)
    std::vector<double> parameters_; // logistic/linear: [w..., b]; kernel: alpha
    std::vector<double> support_;    // kernel: training rows, row-major
    std::string fingerprint_;
};

// Trains config.kind on the given instance subset. The subset must contain
// both classes (kinds logistic and kernel_rbf).
TrainedModel train(const Dataset& dataset, const std::vector<int>& subset,
                   const ModelConfig& config);

// Fraction of subset instances with (predict_proba >= 0.5) == label.
double accuracy(const TrainedModel& model, const Dataset& dataset,
                const std::vector<int>& subset);

// Raw-score linear model used as the analytic attribution oracle.
TrainedModel make_linear_oracle(std::vector<double> weights, double bias);

// Pluggable retraining strategy for deletion diagnostics.
using TrainerFn = std::function<TrainedModel(const Dataset&, const std::vector<int>&)>;

TrainerFn config_trainer(const ModelConfig& config);

// Closed-form linear least squares on the raw 0/1 labels (ridge when
// l2 > 0). Redundant zero-residual points leave the fit unchanged, which is
// what the deletion edge-case tests lean on.
TrainerFn least_squares_trainer(double l2 = 0.0);

} // namespace fedcontrib
