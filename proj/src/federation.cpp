#include "fedcontrib/federation.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "fedcontrib/errors.hpp"
#include "fedcontrib/rng.hpp"
#include "fedcontrib/shapley.hpp"

namespace fedcontrib {

std::string party_role(int party) { return "party:" + std::to_string(party); }

InstanceRef InstanceRef::real(std::string token) {
    InstanceRef ref;
    ref.type = Type::real;
    ref.token = std::move(token);
    return ref;
}

InstanceRef InstanceRef::special() { return InstanceRef{}; }

Json InstanceRef::to_json() const {
    Json j;
    j["type"] = type == Type::real ? "real" : "special";
    if (type == Type::real) j["token"] = token;
    return j;
}

Json FederationMessage::to_json() const {
    Json j;
    j["kind"] = kind == Kind::resolve_request ? "resolve_request" : "resolve_response";
    j["instance_ref"] = ref.to_json();
    if (payload) j["payload"] = round10(*payload);
    return j;
}

void Transcript::record(const std::string& from, const std::string& to, Json message,
                        bool carries_raw_values) {
    if (capture_) {
        Entry e;
        e.seq = count_;
        e.from = from;
        e.to = to;
        e.message = std::move(message);
        e.carries_raw_values = carries_raw_values;
        entries_.push_back(std::move(e));
    }
    ++count_;
}

std::string Transcript::to_jsonl() const {
    std::ostringstream out;
    for (const auto& e : entries_) {
        Json line;
        line["seq"] = e.seq;
        line["from"] = e.from;
        line["to"] = e.to;
        line["message"] = e.message;
        out << line.dump() << "\n";
    }
    return out.str();
}

Party::Party(int id, std::vector<int> feature_indices,
             std::unordered_map<std::string, std::vector<double>> private_store,
             std::vector<double> reference_block)
    : id_(id),
      feature_indices_(std::move(feature_indices)),
      private_store_(std::move(private_store)),
      reference_block_(std::move(reference_block)) {
    if (reference_block_.size() != feature_indices_.size()) {
        throw DataError("reference block width does not match the party's feature block");
    }
    for (const auto& [token, values] : private_store_) {
        if (values.size() != feature_indices_.size()) {
            throw DataError("stored block width does not match the party's feature block");
        }
    }
}

FederationMessage Party::resolve(const FederationMessage& request) const {
    if (request.kind != FederationMessage::Kind::resolve_request) {
        throw DataError("party received a non-request message");
    }
    FederationMessage response;
    response.kind = FederationMessage::Kind::resolve_response;
    response.ref = request.ref;
    if (request.ref.type == InstanceRef::Type::special) {
        response.payload = reference_block_;
        return response;
    }
    const auto it = private_store_.find(request.ref.token);
    if (it == private_store_.end()) {
        throw DataError("party " + std::to_string(id_) + ": unknown instance token");
    }
    response.payload = it->second;
    return response;
}

Federation Federation::assemble(const Dataset& dataset, const VerticalPartition& partition) {
    if (partition.party_count <= 0 || partition.feature_groups.empty()) {
        throw DataError("empty vertical partition");
    }
    Federation fed;
    fed.d_ = dataset.d;
    fed.reference_ = dataset.medians;
    fed.feature_owner_.assign(static_cast<std::size_t>(dataset.d), -1);
    for (int g = 0; g < partition.party_count; ++g) {
        for (int j : partition.feature_groups[static_cast<std::size_t>(g)]) {
            if (j < 0 || j >= dataset.d || fed.feature_owner_[static_cast<std::size_t>(j)] != -1) {
                throw DataError("invalid vertical partition");
            }
            fed.feature_owner_[static_cast<std::size_t>(j)] = g;
        }
    }
    for (int owner : fed.feature_owner_) {
        if (owner == -1) throw DataError("vertical partition does not cover all features");
    }

    // Opaque instance tokens shared by all parties, derived from the data
    // content so assembly stays deterministic.
    const std::uint64_t base = dataset.content_hash();
    std::unordered_set<std::string> seen;
    fed.tokens_.reserve(static_cast<std::size_t>(dataset.n));
    for (int i = 0; i < dataset.n; ++i) {
        std::uint64_t salt = 0;
        std::string token;
        do {
            token = to_hex(derive_stream(base, static_cast<std::uint64_t>(i), salt));
            ++salt;
        } while (!seen.insert(token).second);
        fed.tokens_.push_back(std::move(token));
    }

    fed.parties_.reserve(static_cast<std::size_t>(partition.party_count));
    for (int g = 0; g < partition.party_count; ++g) {
        const auto& block = partition.feature_groups[static_cast<std::size_t>(g)];
        std::unordered_map<std::string, std::vector<double>> store;
        store.reserve(static_cast<std::size_t>(dataset.n));
        for (int i = 0; i < dataset.n; ++i) {
            const auto row = dataset.row(i);
            std::vector<double> values;
            values.reserve(block.size());
            for (int j : block) values.push_back(row[static_cast<std::size_t>(j)]);
            store.emplace(fed.tokens_[static_cast<std::size_t>(i)], std::move(values));
        }
        std::vector<double> reference_block;
        reference_block.reserve(block.size());
        for (int j : block) reference_block.push_back(dataset.medians[static_cast<std::size_t>(j)]);
        fed.parties_.emplace_back(g, block, std::move(store), std::move(reference_block));
    }
    return fed;
}

void Federation::register_model(std::shared_ptr<const TrainedModel> model) {
    if (!model) throw DataError("null model");
    if (model->feature_count() != d_) {
        throw DataError("model expects " + std::to_string(model->feature_count()) +
                        " features, federation has " + std::to_string(d_));
    }
    model_ = std::move(model);
}

const std::string& Federation::token_for(int instance_index) const {
    if (instance_index < 0 || static_cast<std::size_t>(instance_index) >= tokens_.size()) {
        throw DataError("instance index out of range");
    }
    return tokens_[static_cast<std::size_t>(instance_index)];
}

double Federation::federated_predict(const EvaluatorView& view, Transcript* transcript) const {
    if (!model_) throw DataError("no model registered with the prediction host");

    const std::unordered_set<int> federated(view.federated_parties.begin(),
                                            view.federated_parties.end());
    const std::unordered_set<int> fed_on(view.fed_on.begin(), view.fed_on.end());
    const std::unordered_set<int> on_other(view.on_other.begin(), view.on_other.end());
    for (int p : view.federated_parties) {
        if (p < 0 || p >= party_count()) throw DataError("federated party id out of range");
    }
    for (int p : view.fed_on) {
        if (!federated.count(p)) throw DataError("fed_on lists a non-federated party");
    }
    for (int j : view.on_other) {
        if (j < 0 || j >= d_) throw DataError("feature index out of range");
        if (federated.count(feature_owner_[static_cast<std::size_t>(j)])) {
            throw DataError("feature " + std::to_string(j) +
                            " belongs to a federated party; toggle it via fed_on");
        }
    }

    if (transcript) {
        Json request;
        request["kind"] = "predict_request";
        request["instance_ref"] = InstanceRef::real(view.instance_token).to_json();
        request["federated_parties"] = view.federated_parties;
        request["fed_on"] = view.fed_on;
        request["on_other"] = view.on_other;
        transcript->record(kEvaluatorRole, kHostRole, std::move(request), false);
    }

    std::vector<double> assembled(static_cast<std::size_t>(d_), 0.0);
    for (int g = 0; g < party_count(); ++g) {
        const Party& p = parties_[static_cast<std::size_t>(g)];
        FederationMessage request;
        request.kind = FederationMessage::Kind::resolve_request;
        const bool is_federated = federated.count(g) != 0;
        const bool wants_real = !is_federated || fed_on.count(g) != 0;
        request.ref = wants_real ? InstanceRef::real(view.instance_token) : InstanceRef::special();
        if (transcript) transcript->record(kHostRole, party_role(g), request.to_json(), false);

        const FederationMessage response = p.resolve(request);
        if (transcript) transcript->record(party_role(g), kHostRole, response.to_json(), true);

        const auto& block = *response.payload;
        const auto& indices = p.feature_indices();
        if (block.size() != indices.size()) throw DataError("party returned a wrong-size block");
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const int j = indices[k];
            double value = block[k];
            if (!is_federated && !on_other.count(j)) {
                value = reference_[static_cast<std::size_t>(j)]; // masked individually
            }
            assembled[static_cast<std::size_t>(j)] = value;
        }
    }

    const double prediction = model_->predict_proba(assembled);
    if (transcript) {
        Json response;
        response["kind"] = "predict_response";
        response["value"] = round10(prediction);
        transcript->record(kHostRole, kEvaluatorRole, std::move(response), false);
    }
    return prediction;
}

double Federation::federated_predict(const std::string& instance_token, int target_party,
                                     bool fed_on, const std::vector<int>& on_other,
                                     Transcript* transcript) const {
    EvaluatorView view;
    view.instance_token = instance_token;
    view.federated_parties = {target_party};
    if (fed_on) view.fed_on = {target_party};
    view.on_other = on_other;
    return federated_predict(view, transcript);
}

const char* group_shapley_method_name(GroupShapleyMethod method) {
    return method == GroupShapleyMethod::exact ? "exact" : "monte_carlo";
}

Json GroupShapleyReport::to_json(const std::vector<std::string>& feature_names) const {
    Json j;
    j["instance_id"] = instance_index;
    j["instance_token"] = instance_token;
    j["method"] = group_shapley_method_name(method);
    j["M"] = iterations;
    j["seed"] = seed;
    j["baseline"] = round10(baseline);
    j["prediction"] = round10(prediction);
    j["transcript_length"] = transcript_length;
    Json parties = Json::array();
    for (const auto& p : per_party) {
        Json e;
        e["party"] = p.party;
        e["block_size"] = p.block_size;
        e["phi"] = round10(p.phi);
        Json others = Json::array();
        for (const auto& o : p.other_features) {
            Json f;
            f["feature"] = o.feature;
            f["name"] = static_cast<std::size_t>(o.feature) < feature_names.size()
                            ? feature_names[static_cast<std::size_t>(o.feature)]
                            : ("f" + std::to_string(o.feature));
            f["phi"] = round10(o.phi);
            others.push_back(std::move(f));
        }
        e["other_features"] = std::move(others);
        parties.push_back(std::move(e));
    }
    j["per_party"] = std::move(parties);
    return j;
}

namespace {

// One position of the reduced feature space the estimator walks: either a
// single real feature of a non-federated party, or a party's whole block
// collapsed to a united feature (placed at its smallest member's position).
struct ReducedSlot {
    int feature = -1; // global feature index; -1 for a united feature
    int party = -1;
};

std::vector<ReducedSlot> build_reduced_space(const Federation& federation,
                                             const std::vector<int>& federated_parties) {
    std::unordered_set<int> federated(federated_parties.begin(), federated_parties.end());
    std::unordered_set<int> placed;
    std::vector<ReducedSlot> slots;
    for (int j = 0; j < federation.feature_count(); ++j) {
        const int owner = federation.owner_of_feature(j);
        if (!federated.count(owner)) {
            slots.push_back({j, owner});
        } else if (!placed.count(owner)) {
            slots.push_back({-1, owner});
            placed.insert(owner);
        }
    }
    return slots;
}

int slot_stream_id(const Federation& federation, const ReducedSlot& slot) {
    if (slot.feature >= 0) return slot.feature;
    // United feature: smallest member index of the party's block.
    return *std::min_element(federation.party(slot.party).feature_indices().begin(),
                             federation.party(slot.party).feature_indices().end());
}

EvaluatorView view_for_mask(const std::string& token, const std::vector<ReducedSlot>& slots,
                            const std::vector<int>& federated_parties, std::uint64_t mask) {
    EvaluatorView view;
    view.instance_token = token;
    view.federated_parties = federated_parties;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        if (!((mask >> s) & 1u)) continue;
        if (slots[s].feature >= 0) {
            view.on_other.push_back(slots[s].feature);
        } else {
            view.fed_on.push_back(slots[s].party);
        }
    }
    return view;
}

GroupShapleyReport run_group_shapley(const Federation& federation, int instance_index,
                                     const std::vector<int>& federated_parties,
                                     GroupShapleyMethod method, int iterations,
                                     std::uint64_t seed, Transcript* transcript) {
    if (!federation.has_model()) throw DataError("no model registered with the prediction host");
    const std::string& token = federation.token_for(instance_index);
    const auto slots = build_reduced_space(federation, federated_parties);
    const int m = static_cast<int>(slots.size());
    const std::size_t transcript_before = transcript ? transcript->size() : 0;
    Transcript local(false);
    Transcript* log = transcript ? transcript : &local;

    auto eval = [&](std::uint64_t mask, int) {
        return federation.federated_predict(
            view_for_mask(token, slots, federated_parties, mask), log);
    };

    GroupShapleyReport report;
    report.instance_token = token;
    report.instance_index = instance_index;
    report.method = method;
    report.iterations = method == GroupShapleyMethod::exact ? 0 : iterations;
    report.seed = seed;

    std::vector<double> slot_phi(static_cast<std::size_t>(m), 0.0);
    if (method == GroupShapleyMethod::exact) {
        if (m > kEnumerationCap) throw DataError("reduced space exceeds the enumeration cap");
        const std::size_t count = std::size_t{1} << m;
        std::vector<double> values(count, 0.0);
        for (std::size_t mask = 0; mask < count; ++mask) {
            values[mask] = eval(static_cast<std::uint64_t>(mask), -1);
        }
        slot_phi = detail::shapley_from_values(values, m);
        report.baseline = values.front();
        report.prediction = values.back();
    } else {
        if (iterations < 1) throw DataError("iteration count must be at least 1");
        for (int s = 0; s < m; ++s) {
            const std::uint64_t stream =
                derive_stream(seed, static_cast<std::uint64_t>(instance_index),
                              static_cast<std::uint64_t>(slot_stream_id(federation, slots[static_cast<std::size_t>(s)])));
            slot_phi[static_cast<std::size_t>(s)] =
                detail::mc_marginal_mean(eval, m, s, iterations, 0, stream);
        }
        report.baseline = eval(0, -1);
        report.prediction = eval((std::uint64_t{1} << m) - 1, -1);
    }

    // United slots become party attributions; real-feature slots are
    // reported as the run's per-feature context.
    std::vector<OtherFeaturePhi> others;
    for (int s = 0; s < m; ++s) {
        if (slots[static_cast<std::size_t>(s)].feature >= 0) {
            others.push_back({slots[static_cast<std::size_t>(s)].feature, slot_phi[static_cast<std::size_t>(s)]});
        }
    }
    for (int s = 0; s < m; ++s) {
        if (slots[static_cast<std::size_t>(s)].feature >= 0) continue;
        PartyAttribution attribution;
        attribution.party = slots[static_cast<std::size_t>(s)].party;
        attribution.block_size =
            static_cast<int>(federation.party(attribution.party).feature_indices().size());
        attribution.phi = slot_phi[static_cast<std::size_t>(s)];
        attribution.other_features = others;
        report.per_party.push_back(std::move(attribution));
    }
    report.transcript_length =
        (transcript ? transcript->size() : local.size()) - (transcript ? transcript_before : 0);
    return report;
}

} // namespace

GroupShapleyReport federated_group_shapley(const Federation& federation, int instance_index,
                                           int target_party, GroupShapleyMethod method,
                                           int iterations, std::uint64_t seed,
                                           Transcript* transcript) {
    if (target_party < 0 || target_party >= federation.party_count()) {
        throw DataError("target party out of range");
    }
    return run_group_shapley(federation, instance_index, {target_party}, method, iterations, seed,
                             transcript);
}

GroupShapleyReport federated_group_shapley_all(const Federation& federation, int instance_index,
                                               GroupShapleyMethod method, int iterations,
                                               std::uint64_t seed, Transcript* transcript) {
    GroupShapleyReport merged;
    for (int g = 0; g < federation.party_count(); ++g) {
        GroupShapleyReport run = federated_group_shapley(federation, instance_index, g, method,
                                                         iterations, seed, transcript);
        if (g == 0) {
            merged = run;
            merged.per_party.clear();
        }
        merged.transcript_length = (g == 0 ? run.transcript_length
                                           : merged.transcript_length + run.transcript_length);
        for (auto& p : run.per_party) merged.per_party.push_back(std::move(p));
    }
    return merged;
}

GroupShapleyReport federated_group_shapley_simultaneous(const Federation& federation,
                                                        int instance_index,
                                                        GroupShapleyMethod method, int iterations,
                                                        std::uint64_t seed, Transcript* transcript) {
    std::vector<int> everyone;
    for (int g = 0; g < federation.party_count(); ++g) everyone.push_back(g);
    return run_group_shapley(federation, instance_index, everyone, method, iterations, seed,
                             transcript);
}

Json AuditVerdict::to_json() const {
    Json j;
    j["passed"] = passed;
    j["offending"] = offending;
    return j;
}

AuditVerdict privacy_audit(const Transcript& transcript) {
    if (!transcript.capturing() && transcript.size() > 0) {
        throw DataError("privacy audit needs a transcript captured with full entries");
    }
    AuditVerdict verdict;
    for (const auto& entry : transcript.entries()) {
        if (entry.to == kEvaluatorRole && entry.carries_raw_values) {
            verdict.offending.push_back(entry.seq);
        }
    }
    verdict.passed = verdict.offending.empty();
    return verdict;
}

} // namespace fedcontrib
