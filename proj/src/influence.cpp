#include "fedcontrib/influence.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fedcontrib/errors.hpp"
#include "fedcontrib/parallel.hpp"

namespace fedcontrib {

namespace {

void check_eval_set(const Dataset& dataset, const std::vector<int>& eval_set) {
    if (eval_set.empty()) throw DataError("evaluation set is empty");
    for (int i : eval_set) {
        if (i < 0 || i >= dataset.n) throw DataError("evaluation index out of range");
    }
}

std::vector<double> predictions_on(const TrainedModel& model, const Dataset& dataset,
                                   const std::vector<int>& eval_set) {
    std::vector<double> out(eval_set.size());
    for (std::size_t k = 0; k < eval_set.size(); ++k) {
        out[k] = model.predict_proba(dataset.row(eval_set[k]));
    }
    return out;
}

double mean_abs_change(const std::vector<double>& base, const std::vector<double>& changed) {
    double sum = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) sum += std::fabs(base[k] - changed[k]);
    return sum / static_cast<double>(base.size());
}

std::vector<int> without(const std::vector<int>& full, const std::vector<int>& removed) {
    std::unordered_set<int> gone(removed.begin(), removed.end());
    std::vector<int> rest;
    rest.reserve(full.size());
    for (int i : full) {
        if (!gone.count(i)) rest.push_back(i);
    }
    return rest;
}

// Influence of deleting `removed` given the full model's predictions.
double deletion_influence(const Dataset& dataset, const std::vector<int>& removed,
                          const TrainerFn& trainer, const std::vector<int>& eval_set,
                          const std::vector<double>& base_predictions) {
    const std::vector<int> rest = without(all_indices(dataset.n), removed);
    if (rest.empty()) throw DataError("deletion leaves no training instances");
    const TrainedModel retrained = trainer(dataset, rest);
    return mean_abs_change(base_predictions, predictions_on(retrained, dataset, eval_set));
}

} // namespace

const char* influence_method_name(InfluenceMethod method) {
    return method == InfluenceMethod::batch_deletion ? "batch_deletion" : "summed_single";
}

Json InfluenceReport::to_json() const {
    Json j;
    j["method"] = influence_method_name(method);
    j["n"] = evaluation_size;
    Json parties = Json::array();
    for (const auto& p : per_party) {
        Json e;
        e["id"] = p.party;
        e["size"] = p.size;
        e["influence"] = round10(p.influence);
        parties.push_back(std::move(e));
    }
    j["parties"] = std::move(parties);
    j["config_fingerprint"] = config_fingerprint;
    j["seed"] = seed;
    return j;
}

double influence_single(const Dataset& dataset, int i, const TrainerFn& trainer,
                        const std::vector<int>& eval_set) {
    if (i < 0 || i >= dataset.n) throw DataError("instance index out of range");
    check_eval_set(dataset, eval_set);
    const TrainedModel full = trainer(dataset, all_indices(dataset.n));
    return deletion_influence(dataset, {i}, trainer, eval_set,
                              predictions_on(full, dataset, eval_set));
}

double influence_single(const Dataset& dataset, int i, const ModelConfig& config,
                        const std::vector<int>& eval_set) {
    return influence_single(dataset, i, config_trainer(config), eval_set);
}

double influence_group_sum(const Dataset& dataset, const std::vector<int>& party_set,
                           const TrainerFn& trainer, const std::vector<int>& eval_set) {
    if (party_set.empty()) return 0.0;
    check_eval_set(dataset, eval_set);
    const TrainedModel full = trainer(dataset, all_indices(dataset.n));
    const std::vector<double> base = predictions_on(full, dataset, eval_set);

    std::vector<double> each(party_set.size(), 0.0);
    parallel_for(static_cast<int>(party_set.size()), [&](int k) {
        each[static_cast<std::size_t>(k)] = deletion_influence(
            dataset, {party_set[static_cast<std::size_t>(k)]}, trainer, eval_set, base);
    });
    double total = 0.0;
    for (double v : each) total += v;
    return total;
}

double influence_group_sum(const Dataset& dataset, const std::vector<int>& party_set,
                           const ModelConfig& config, const std::vector<int>& eval_set) {
    return influence_group_sum(dataset, party_set, config_trainer(config), eval_set);
}

namespace {

InfluenceReport build_report(const Dataset& dataset, const HorizontalPartition& partition,
                             const ModelConfig& config, const std::vector<int>& eval_set,
                             InfluenceMethod method) {
    check_eval_set(dataset, eval_set);
    if (partition.party_count <= 0 ||
        partition.assignments.size() != static_cast<std::size_t>(partition.party_count)) {
        throw DataError("invalid horizontal partition");
    }

    const TrainerFn trainer = config_trainer(config);
    const TrainedModel full = trainer(dataset, all_indices(dataset.n));
    const std::vector<double> base = predictions_on(full, dataset, eval_set);

    InfluenceReport report;
    report.method = method;
    report.evaluation_size = static_cast<int>(eval_set.size());
    report.config_fingerprint = full.fingerprint();
    report.seed = config.seed;
    report.per_party.resize(static_cast<std::size_t>(partition.party_count));

    if (method == InfluenceMethod::batch_deletion) {
        parallel_for(partition.party_count, [&](int k) {
            const auto& owned = partition.assignments[static_cast<std::size_t>(k)];
            auto& entry = report.per_party[static_cast<std::size_t>(k)];
            entry.party = k;
            entry.size = static_cast<int>(owned.size());
            // An empty set goes through the same retrain path; determinism
            // makes the prediction change exactly zero.
            entry.influence = deletion_influence(dataset, owned, trainer, eval_set, base);
        });
    } else {
        // The per-instance parallelism lives inside influence_group_sum's
        // deletion loop; parties are processed in order.
        for (int k = 0; k < partition.party_count; ++k) {
            const auto& owned = partition.assignments[static_cast<std::size_t>(k)];
            auto& entry = report.per_party[static_cast<std::size_t>(k)];
            entry.party = k;
            entry.size = static_cast<int>(owned.size());
            double total = 0.0;
            if (!owned.empty()) {
                std::vector<double> each(owned.size(), 0.0);
                parallel_for(static_cast<int>(owned.size()), [&](int j) {
                    each[static_cast<std::size_t>(j)] = deletion_influence(
                        dataset, {owned[static_cast<std::size_t>(j)]}, trainer, eval_set, base);
                });
                for (double v : each) total += v;
            }
            entry.influence = total;
        }
    }
    return report;
}

} // namespace

InfluenceReport influence_group_batch(const Dataset& dataset, const HorizontalPartition& partition,
                                      const ModelConfig& config, const std::vector<int>& eval_set) {
    return build_report(dataset, partition, config, eval_set, InfluenceMethod::batch_deletion);
}

InfluenceReport influence_group_summed(const Dataset& dataset, const HorizontalPartition& partition,
                                       const ModelConfig& config, const std::vector<int>& eval_set) {
    return build_report(dataset, partition, config, eval_set, InfluenceMethod::summed_single);
}

} // namespace fedcontrib
