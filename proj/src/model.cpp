#include "fedcontrib/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fedcontrib/errors.hpp"

namespace fedcontrib {

namespace {

double logistic_link(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

void check_dimension(int expected, std::size_t got) {
    if (static_cast<std::size_t>(expected) != got) {
        throw DataError("feature vector has length " + std::to_string(got) + ", model expects " +
                        std::to_string(expected));
    }
}

void check_subset(const Dataset& dataset, const std::vector<int>& subset, bool require_both_classes) {
    if (subset.empty()) throw DataError("training subset is empty");
    bool saw[2] = {false, false};
    for (int i : subset) {
        if (i < 0 || i >= dataset.n) {
            throw DataError("instance index " + std::to_string(i) + " out of range");
        }
        saw[dataset.labels[static_cast<std::size_t>(i)]] = true;
    }
    if (require_both_classes && !(saw[0] && saw[1])) {
        throw DataError("training subset must contain both classes");
    }
}

double resolve_gamma(const ModelConfig& config, int d) {
    const double gamma = config.rbf_gamma > 0.0 ? config.rbf_gamma : 1.0 / d;
    if (!(gamma > 0.0)) throw NumericError("rbf_gamma must be positive");
    return gamma;
}

std::string training_fingerprint(const Dataset& dataset, const std::vector<int>& subset,
                                 const ModelConfig& config) {
    std::uint64_t h = fnv1a64(&config.kind, sizeof(config.kind));
    h = fnv1a64(&config.l2_strength, sizeof(double), h);
    h = fnv1a64(&config.rbf_gamma, sizeof(double), h);
    h = fnv1a64(&config.max_iterations, sizeof(int), h);
    h = fnv1a64(&config.tolerance, sizeof(double), h);
    h = fnv1a64(&config.seed, sizeof(std::uint64_t), h);
    for (int i : subset) {
        const auto row = dataset.row(i);
        h = fnv1a64(row.data(), row.size() * sizeof(double), h);
        h = fnv1a64(&dataset.labels[static_cast<std::size_t>(i)], sizeof(int), h);
    }
    return to_hex(h);
}

TrainedModel train_logistic(const Dataset& dataset, const std::vector<int>& subset,
                            const ModelConfig& config) {
    const int d = dataset.d;
    const int m = static_cast<int>(subset.size());
    std::vector<double> w(static_cast<std::size_t>(d) + 1, 0.0); // zero init, [w..., b]

    // Step size from the Lipschitz bound of the regularized logistic
    // gradient; guarantees monotone full-batch descent without line search.
    double mean_sq = 0.0;
    for (int i : subset) {
        const auto row = dataset.row(i);
        double sq = 1.0; // implicit bias column
        for (double v : row) sq += v * v;
        mean_sq += sq;
    }
    mean_sq /= m;
    const double step = 1.0 / (0.25 * mean_sq + config.l2_strength);

    std::vector<double> grad(static_cast<std::size_t>(d) + 1, 0.0);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i : subset) {
            const auto row = dataset.row(i);
            double raw = w[static_cast<std::size_t>(d)];
            for (int j = 0; j < d; ++j) raw += w[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
            const double err = logistic_link(raw) - dataset.labels[static_cast<std::size_t>(i)];
            for (int j = 0; j < d; ++j) grad[static_cast<std::size_t>(j)] += err * row[static_cast<std::size_t>(j)];
            grad[static_cast<std::size_t>(d)] += err;
        }
        double norm_sq = 0.0;
        for (int j = 0; j <= d; ++j) {
            grad[static_cast<std::size_t>(j)] /= m;
            if (j < d) grad[static_cast<std::size_t>(j)] += config.l2_strength * w[static_cast<std::size_t>(j)];
            norm_sq += grad[static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
        }
        if (std::sqrt(norm_sq) <= config.tolerance) break;
        for (int j = 0; j <= d; ++j) w[static_cast<std::size_t>(j)] -= step * grad[static_cast<std::size_t>(j)];
    }
    return TrainedModel::logistic(config, d, std::move(w),
                                  training_fingerprint(dataset, subset, config));
}

TrainedModel train_kernel(const Dataset& dataset, const std::vector<int>& subset,
                          const ModelConfig& config) {
    const int d = dataset.d;
    const int m = static_cast<int>(subset.size());
    const double gamma = resolve_gamma(config, d);

    std::vector<double> support(static_cast<std::size_t>(m) * d);
    Eigen::VectorXd targets(m); // labels mapped to +-1
    for (int a = 0; a < m; ++a) {
        const auto row = dataset.row(subset[static_cast<std::size_t>(a)]);
        std::copy(row.begin(), row.end(), support.begin() + static_cast<std::size_t>(a) * d);
        targets[a] = dataset.labels[static_cast<std::size_t>(subset[static_cast<std::size_t>(a)])] == 1 ? 1.0 : -1.0;
    }

    Eigen::MatrixXd gram(m, m);
    for (int a = 0; a < m; ++a) {
        const double* ra = support.data() + static_cast<std::size_t>(a) * d;
        for (int b = 0; b <= a; ++b) {
            const double* rb = support.data() + static_cast<std::size_t>(b) * d;
            double dist = 0.0;
            for (int j = 0; j < d; ++j) {
                const double diff = ra[j] - rb[j];
                dist += diff * diff;
            }
            const double k = std::exp(-gamma * dist);
            gram(a, b) = k;
            gram(b, a) = k;
        }
        gram(a, a) += config.l2_strength;
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw NumericError("kernel system is not positive definite; increase l2_strength");
    }
    const Eigen::VectorXd alpha = llt.solve(targets);

    std::vector<double> coeffs(alpha.data(), alpha.data() + m);
    return TrainedModel::kernel(config, d, gamma, std::move(coeffs), std::move(support),
                                training_fingerprint(dataset, subset, config));
}

} // namespace

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::logistic: return "logistic";
    case ModelKind::kernel_rbf: return "kernel_rbf";
    case ModelKind::linear_raw: return "linear_raw";
    }
    return "linear_raw";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "logistic") return ModelKind::logistic;
    if (name == "kernel_rbf") return ModelKind::kernel_rbf;
    if (name == "linear_raw") return ModelKind::linear_raw;
    throw DataError("unknown model kind: " + name);
}

Json ModelConfig::to_json() const {
    Json j;
    j["kind"] = model_kind_name(kind);
    j["l2_strength"] = l2_strength;
    j["rbf_gamma"] = rbf_gamma;
    j["max_iterations"] = max_iterations;
    j["tolerance"] = tolerance;
    j["seed"] = seed;
    return j;
}

ModelConfig ModelConfig::from_json(const Json& j) {
    ModelConfig c;
    c.kind = model_kind_from_name(j.at("kind").get<std::string>());
    c.l2_strength = j.at("l2_strength").get<double>();
    c.rbf_gamma = j.at("rbf_gamma").get<double>();
    c.max_iterations = j.at("max_iterations").get<int>();
    c.tolerance = j.at("tolerance").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

double TrainedModel::predict_proba(std::span<const double> x) const {
    check_dimension(d_, x.size());
    switch (kind_) {
    case ModelKind::logistic:
    case ModelKind::linear_raw: {
        double raw = parameters_[static_cast<std::size_t>(d_)];
        for (int j = 0; j < d_; ++j) raw += parameters_[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        return kind_ == ModelKind::logistic ? logistic_link(raw) : raw;
    }
    case ModelKind::kernel_rbf: {
        double raw = 0.0;
        for (int a = 0; a < n_support_; ++a) {
            const double* row = support_.data() + static_cast<std::size_t>(a) * d_;
            double dist = 0.0;
            for (int j = 0; j < d_; ++j) {
                const double diff = x[static_cast<std::size_t>(j)] - row[j];
                dist += diff * diff;
            }
            raw += parameters_[static_cast<std::size_t>(a)] * std::exp(-gamma_ * dist);
        }
        return logistic_link(raw);
    }
    }
    throw NumericError("unreachable model kind");
}

Json TrainedModel::to_json() const {
    Json j;
    j["kind"] = model_kind_name(kind_);
    j["config"] = config_.to_json();
    j["d"] = d_;
    j["n_support"] = n_support_;
    j["gamma"] = gamma_;
    // Flat layout: logistic/linear [w..., b]; kernel [alpha..., support rows...].
    std::vector<double> block = parameters_;
    block.insert(block.end(), support_.begin(), support_.end());
    j["parameters"] = block;
    j["fingerprint"] = fingerprint_;
    return j;
}

TrainedModel TrainedModel::from_json(const Json& j) {
    const ModelKind kind = model_kind_from_name(j.at("kind").get<std::string>());
    const ModelConfig config = ModelConfig::from_json(j.at("config"));
    const int d = j.at("d").get<int>();
    const int n_support = j.at("n_support").get<int>();
    const double gamma = j.at("gamma").get<double>();
    auto block = j.at("parameters").get<std::vector<double>>();
    const std::string fingerprint = j.at("fingerprint").get<std::string>();

    if (kind == ModelKind::kernel_rbf) {
        const std::size_t expect = static_cast<std::size_t>(n_support) * (1 + d);
        if (block.size() != expect) throw DataError("model parameter block has wrong size");
        std::vector<double> alpha(block.begin(), block.begin() + n_support);
        std::vector<double> support(block.begin() + n_support, block.end());
        return kernel(config, d, gamma, std::move(alpha), std::move(support), fingerprint);
    }
    if (block.size() != static_cast<std::size_t>(d) + 1) {
        throw DataError("model parameter block has wrong size");
    }
    if (kind == ModelKind::logistic) return logistic(config, d, std::move(block), fingerprint);
    const double bias = block.back();
    block.pop_back();
    return linear(std::move(block), bias);
}

TrainedModel TrainedModel::linear(std::vector<double> weights, double bias) {
    TrainedModel m;
    m.kind_ = ModelKind::linear_raw;
    m.config_.kind = ModelKind::linear_raw;
    m.d_ = static_cast<int>(weights.size());
    m.parameters_ = std::move(weights);
    m.parameters_.push_back(bias);
    std::uint64_t h = fnv1a64(m.parameters_.data(), m.parameters_.size() * sizeof(double));
    m.fingerprint_ = to_hex(h);
    return m;
}

TrainedModel TrainedModel::logistic(const ModelConfig& config, int d,
                                    std::vector<double> weights_bias, std::string fingerprint) {
    TrainedModel m;
    m.kind_ = ModelKind::logistic;
    m.config_ = config;
    m.d_ = d;
    m.parameters_ = std::move(weights_bias);
    m.fingerprint_ = std::move(fingerprint);
    return m;
}

TrainedModel TrainedModel::kernel(const ModelConfig& config, int d, double gamma,
                                  std::vector<double> alpha, std::vector<double> support,
                                  std::string fingerprint) {
    TrainedModel m;
    m.kind_ = ModelKind::kernel_rbf;
    m.config_ = config;
    m.d_ = d;
    m.gamma_ = gamma;
    m.n_support_ = static_cast<int>(alpha.size());
    m.parameters_ = std::move(alpha);
    m.support_ = std::move(support);
    m.fingerprint_ = std::move(fingerprint);
    return m;
}

TrainedModel train(const Dataset& dataset, const std::vector<int>& subset,
                   const ModelConfig& config) {
    check_subset(dataset, subset, /*require_both_classes=*/true);
    switch (config.kind) {
    case ModelKind::logistic: return train_logistic(dataset, subset, config);
    case ModelKind::kernel_rbf: return train_kernel(dataset, subset, config);
    case ModelKind::linear_raw:
        throw DataError("linear_raw is not a trainable config kind; use least_squares_trainer");
    }
    throw DataError("unknown model kind");
}

double accuracy(const TrainedModel& model, const Dataset& dataset, const std::vector<int>& subset) {
    if (subset.empty()) throw DataError("accuracy requires a non-empty subset");
    int correct = 0;
    for (int i : subset) {
        if (i < 0 || i >= dataset.n) throw DataError("instance index out of range");
        const int predicted = model.predict_proba(dataset.row(i)) >= 0.5 ? 1 : 0;
        if (predicted == dataset.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(subset.size());
}

TrainedModel make_linear_oracle(std::vector<double> weights, double bias) {
    return TrainedModel::linear(std::move(weights), bias);
}

TrainerFn config_trainer(const ModelConfig& config) {
    return [config](const Dataset& dataset, const std::vector<int>& subset) {
        return train(dataset, subset, config);
    };
}

TrainerFn least_squares_trainer(double l2) {
    return [l2](const Dataset& dataset, const std::vector<int>& subset) {
        check_subset(dataset, subset, /*require_both_classes=*/false);
        const int d = dataset.d;
        const int m = static_cast<int>(subset.size());

        Eigen::MatrixXd design(m, d + 1);
        Eigen::VectorXd y(m);
        for (int a = 0; a < m; ++a) {
            const auto row = dataset.row(subset[static_cast<std::size_t>(a)]);
            for (int j = 0; j < d; ++j) design(a, j) = row[static_cast<std::size_t>(j)];
            design(a, d) = 1.0;
            y[a] = dataset.labels[static_cast<std::size_t>(subset[static_cast<std::size_t>(a)])];
        }

        Eigen::MatrixXd normal = design.transpose() * design;
        for (int j = 0; j < d; ++j) normal(j, j) += l2 * m; // bias unregularized
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
        if (ldlt.info() != Eigen::Success) throw NumericError("least-squares system is singular");
        const Eigen::VectorXd w = ldlt.solve(design.transpose() * y);
        if (!w.allFinite()) throw NumericError("least-squares solution is not finite");

        std::vector<double> weights(w.data(), w.data() + d);
        return TrainedModel::linear(std::move(weights), w[d]);
    };
}

} // namespace fedcontrib
