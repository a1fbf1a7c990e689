#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcontrib/dataset.hpp"
#include "fedcontrib/json_io.hpp"
#include "fedcontrib/model.hpp"

namespace fedcontrib {

enum class InfluenceMethod {
    batch_deletion, // one retrain per party, its whole set deleted at once
    summed_single,  // sum of per-instance deletion influences
};

const char* influence_method_name(InfluenceMethod method);

struct PartyInfluence {
    int party = 0;
    int size = 0;
    double influence = 0.0;
};

struct InfluenceReport {
    InfluenceMethod method = InfluenceMethod::batch_deletion;
    int evaluation_size = 0;
    std::vector<PartyInfluence> per_party;
    std::string config_fingerprint;
    std::uint64_t seed = 0;

    // {method, n, parties:[{id,size,influence}], config_fingerprint, seed}
    Json to_json() const;
};

// Mean absolute prediction change over eval_set after retraining with
// instance i deleted. The full model is trained on every instance of the
// dataset; predictions are compared on the original rows.
double influence_single(const Dataset& dataset, int i, const TrainerFn& trainer,
                        const std::vector<int>& eval_set);
double influence_single(const Dataset& dataset, int i, const ModelConfig& config,
                        const std::vector<int>& eval_set);

// Total influence of an instance set as the sum of single deletions.
double influence_group_sum(const Dataset& dataset, const std::vector<int>& party_set,
                           const TrainerFn& trainer, const std::vector<int>& eval_set);
double influence_group_sum(const Dataset& dataset, const std::vector<int>& party_set,
                           const ModelConfig& config, const std::vector<int>& eval_set);

// One batch deletion per party: retrain without the party's whole set and
// average the absolute prediction change. K retrains total.
InfluenceReport influence_group_batch(const Dataset& dataset, const HorizontalPartition& partition,
                                      const ModelConfig& config, const std::vector<int>& eval_set);

// Per-party summed single deletions; one retrain per instance.
InfluenceReport influence_group_summed(const Dataset& dataset, const HorizontalPartition& partition,
                                       const ModelConfig& config, const std::vector<int>& eval_set);

} // namespace fedcontrib
