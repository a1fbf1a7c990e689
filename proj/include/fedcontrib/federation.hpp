#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedcontrib/dataset.hpp"
#include "fedcontrib/json_io.hpp"
#include "fedcontrib/model.hpp"

namespace fedcontrib {

// Simulated vertical federation. Roles:
//   - parties: hold private feature blocks keyed by opaque instance tokens;
//     they answer resolve requests with block values (real token) or their
//     reference block (special id).
//   - prediction host: assembles full feature vectors from party responses,
//     evaluates the registered central model, returns the scalar.
//   - evaluator: the contribution-measuring coordinator. Its inbound traffic
//     is restricted to scalar predictions; it never sees raw blocks.

inline constexpr const char* kEvaluatorRole = "evaluator";
inline constexpr const char* kHostRole = "host";

std::string party_role(int party);

// Reference to an instance on the wire: a shared opaque token, or the
// special id that asks a party for its reference block instead.
struct InstanceRef {
    enum class Type { real, special };
    Type type = Type::special;
    std::string token;

    static InstanceRef real(std::string token);
    static InstanceRef special();
    Json to_json() const; // {type, token?}
};

struct FederationMessage {
    enum class Kind { resolve_request, resolve_response };
    Kind kind = Kind::resolve_request;
    InstanceRef ref;
    std::optional<std::vector<double>> payload; // block values (responses only)

    Json to_json() const; // {kind, instance_ref:{type, token?}, payload?}
};

// Per-run message log. The entry count is always maintained; full entries
// are stored only when capture is on (audits), keeping long runs cheap.
class Transcript {
public:
    struct Entry {
        std::size_t seq = 0;
        std::string from;
        std::string to;
        Json message;
        bool carries_raw_values = false;
    };

    explicit Transcript(bool capture = false) : capture_(capture) {}

    void record(const std::string& from, const std::string& to, Json message,
                bool carries_raw_values);
    std::size_t size() const { return count_; }
    const std::vector<Entry>& entries() const { return entries_; }
    bool capturing() const { return capture_; }

    std::string to_jsonl() const; // one {seq,from,to,message} object per line

private:
    bool capture_ = false;
    std::size_t count_ = 0;
    std::vector<Entry> entries_;
};

class Party {
public:
    Party(int id, std::vector<int> feature_indices,
          std::unordered_map<std::string, std::vector<double>> private_store,
          std::vector<double> reference_block);

    int id() const { return id_; }
    const std::vector<int>& feature_indices() const { return feature_indices_; }
    std::size_t store_size() const { return private_store_.size(); }

    // Answers a resolve request: real token -> stored block, special id ->
    // reference block. Unknown tokens are an error.
    FederationMessage resolve(const FederationMessage& request) const;

private:
    int id_;
    std::vector<int> feature_indices_;
    std::unordered_map<std::string, std::vector<double>> private_store_;
    std::vector<double> reference_block_;
};

// What the evaluator is allowed to specify for one prediction: which
// features are on, never their values. Parties listed in federated_parties
// are addressed as united features via real/special ids; features of the
// remaining parties are toggled individually through on_other.
struct EvaluatorView {
    std::string instance_token;
    std::vector<int> federated_parties;
    std::vector<int> fed_on;       // subset of federated_parties that are on
    std::vector<int> on_other;     // global feature indices (non-federated parties) that are on
};

class Federation {
public:
    static Federation assemble(const Dataset& dataset, const VerticalPartition& partition);

    void register_model(std::shared_ptr<const TrainedModel> model);
    bool has_model() const { return model_ != nullptr; }

    int party_count() const { return static_cast<int>(parties_.size()); }
    const Party& party(int g) const { return parties_.at(static_cast<std::size_t>(g)); }
    int feature_count() const { return d_; }
    int instance_count() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::string& token_for(int instance_index) const;
    int owner_of_feature(int feature) const { return feature_owner_.at(static_cast<std::size_t>(feature)); }
    const std::vector<double>& reference() const { return reference_; }

    // Runs one protocol round and returns the scalar prediction. The
    // evaluator's view carries only on/off statuses and the instance token.
    double federated_predict(const EvaluatorView& view, Transcript* transcript = nullptr) const;

    // Single-target convenience mirroring the dual-party protocol shape.
    double federated_predict(const std::string& instance_token, int target_party, bool fed_on,
                             const std::vector<int>& on_other,
                             Transcript* transcript = nullptr) const;

private:
    Federation() = default;

    int d_ = 0;
    std::vector<Party> parties_;
    std::vector<std::string> tokens_;
    std::vector<int> feature_owner_;  // global feature index -> party id
    std::vector<double> reference_;   // host-side medians for masking
    std::shared_ptr<const TrainedModel> model_;
};

enum class GroupShapleyMethod { exact, monte_carlo };

const char* group_shapley_method_name(GroupShapleyMethod method);

struct OtherFeaturePhi {
    int feature = 0;
    double phi = 0.0;
};

struct PartyAttribution {
    int party = 0;
    int block_size = 0;
    double phi = 0.0;                           // value of the united federated feature
    std::vector<OtherFeaturePhi> other_features; // per-feature values for the evaluating run
};

struct GroupShapleyReport {
    std::string instance_token;
    int instance_index = -1;
    GroupShapleyMethod method = GroupShapleyMethod::monte_carlo;
    int iterations = 0; // M; 0 for exact
    std::uint64_t seed = 0;
    double baseline = 0.0;   // all features off
    double prediction = 0.0; // all features on
    std::size_t transcript_length = 0;
    std::vector<PartyAttribution> per_party;

    Json to_json(const std::vector<std::string>& feature_names) const;
};

// Shapley value of party g's united federated feature for one instance,
// estimated over the reduced space {other features individually} + {j_fed}
// with every evaluation routed through the masking protocol. Monte-Carlo
// streams are derived per (instance, feature); the united feature uses the
// smallest member index as its stream coordinate.
GroupShapleyReport federated_group_shapley(const Federation& federation, int instance_index,
                                           int target_party, GroupShapleyMethod method,
                                           int iterations, std::uint64_t seed,
                                           Transcript* transcript = nullptr);

// Repeats the estimation for every party and merges the reports.
GroupShapleyReport federated_group_shapley_all(const Federation& federation, int instance_index,
                                               GroupShapleyMethod method, int iterations,
                                               std::uint64_t seed, Transcript* transcript = nullptr);

// Alternative mode: every party becomes a united federated feature in one
// reduced space of party_count features, valued in a single run.
GroupShapleyReport federated_group_shapley_simultaneous(const Federation& federation,
                                                        int instance_index,
                                                        GroupShapleyMethod method, int iterations,
                                                        std::uint64_t seed,
                                                        Transcript* transcript = nullptr);

struct AuditVerdict {
    bool passed = false;
    std::vector<std::size_t> offending; // transcript entry sequence numbers

    Json to_json() const;
};

// Verifies the evaluator's inbound messages carry only scalar predictions
// and opaque ids -- no raw feature values. Requires a captured transcript.
AuditVerdict privacy_audit(const Transcript& transcript);

} // namespace fedcontrib
