// fedcontrib command line: train the reference classifier and measure
// per-party contributions for horizontal (deletion influence) and vertical
// (federated-feature group Shapley) federations. Every command writes
// machine-readable JSON reports, figure SVGs derived from them, and a run
// manifest. All randomness flows from --seed; re-runs with identical flags
// produce byte-identical reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fedcontrib/csv.hpp"
#include "fedcontrib/dataset.hpp"
#include "fedcontrib/errors.hpp"
#include "fedcontrib/federation.hpp"
#include "fedcontrib/influence.hpp"
#include "fedcontrib/json_io.hpp"
#include "fedcontrib/model.hpp"
#include "fedcontrib/parallel.hpp"
#include "fedcontrib/rng.hpp"
#include "fedcontrib/shapley.hpp"
#include "fedcontrib/svg.hpp"

namespace fs = std::filesystem;
using namespace fedcontrib;

namespace {

struct CommonOptions {
    std::string data;
    std::string target = "Biopsy";
    std::string out_dir = "out";
    std::string format = "json";
    std::string model = "kernel-rbf";
    std::string model_file;
    std::uint64_t seed = 42;
    double l2 = 1.0;
    double gamma = 0.0; // 0 -> 1/d
    double tolerance = 1e-8;
    int max_iterations = 500;
    double test_fraction = 0.3;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_model_file) {
    cmd->add_option("--data", opt.data, "input CSV path")->required();
    cmd->add_option("--target", opt.target, "target column name (default Biopsy)");
    cmd->add_option("--seed", opt.seed, "root seed for every random choice");
    cmd->add_option("--model", opt.model, "classifier kind")
        ->check(CLI::IsMember({"logistic", "kernel-rbf"}));
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--l2", opt.l2, "L2 regularization strength");
    cmd->add_option("--gamma", opt.gamma, "RBF coefficient; 0 means 1/#features");
    cmd->add_option("--max-iters", opt.max_iterations, "gradient-descent iteration budget");
    cmd->add_option("--tol", opt.tolerance, "gradient-norm stop tolerance");
    if (with_model_file) {
        cmd->add_option("--model-file", opt.model_file,
                        "trained model JSON from `train`; omitted -> train in-process");
    }
}

ModelConfig make_config(const CommonOptions& opt) {
    ModelConfig config;
    config.kind = opt.model == "logistic" ? ModelKind::logistic : ModelKind::kernel_rbf;
    config.l2_strength = opt.l2;
    config.rbf_gamma = opt.gamma;
    config.max_iterations = opt.max_iterations;
    config.tolerance = opt.tolerance;
    config.seed = opt.seed;
    return config;
}

std::string config_hash(const CommonOptions& opt, const std::string& command) {
    std::ostringstream ss;
    ss << command << '|' << opt.target << '|' << opt.model << '|' << opt.seed << '|' << opt.l2
       << '|' << opt.gamma << '|' << opt.max_iterations << '|' << opt.tolerance << '|'
       << opt.test_fraction << '|' << opt.format;
    const std::string s = ss.str();
    return to_hex(fnv1a64(s.data(), s.size()));
}

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

// Collects output files and writes the manifest last, so everything the
// command emitted is listed.
class RunOutputs {
public:
    RunOutputs(std::string command, const CommonOptions& opt)
        : command_(std::move(command)), opt_(opt), started_(iso_utc_now()) {
        fs::create_directories(opt.out_dir);
    }

    std::string path(const std::string& name) {
        names_.push_back(name);
        return (fs::path(opt_.out_dir) / name).string();
    }

    void write_json(const std::string& name, const Json& j) { write_json_file(path(name), j); }
    void write_text(const std::string& name, const std::string& content) {
        write_text_file(path(name), content);
    }

    void finish() {
        Json manifest;
        manifest["command"] = command_;
        manifest["data"] = opt_.data;
        manifest["target"] = opt_.target;
        manifest["seed"] = opt_.seed;
        manifest["config_hash"] = config_hash(opt_, command_);
        manifest["started_at"] = started_;
        manifest["finished_at"] = iso_utc_now();
        manifest["outputs"] = names_;
        write_json_file((fs::path(opt_.out_dir) / "manifest.json").string(), manifest);
    }

private:
    std::string command_;
    const CommonOptions& opt_;
    std::string started_;
    std::vector<std::string> names_;
};

std::string fmt_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", round10(v));
    return std::string(buf);
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

Dataset load_dataset(const CommonOptions& opt) {
    return prepare(load_csv(opt.data, opt.target), opt.target);
}

// Seeded shuffle split; the same root seed reproduces the same split in
// every command.
void split_train_test(const Dataset& dataset, std::uint64_t seed, double test_fraction,
                      std::vector<int>& train_idx, std::vector<int>& test_idx) {
    std::vector<int> order = all_indices(dataset.n);
    Rng rng(derive_stream(seed, 0x73706C6974ULL, 0)); // split stream
    rng.shuffle(order);
    const int n_test = std::max(1, static_cast<int>(std::floor(dataset.n * test_fraction + 0.5)));
    if (n_test >= dataset.n) throw DataError("test fraction leaves no training data");
    test_idx.assign(order.begin(), order.begin() + n_test);
    train_idx.assign(order.begin() + n_test, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
}

// Model for attribution commands: load the artifact when given, otherwise
// reproduce the train command's split and fit.
TrainedModel obtain_model(const CommonOptions& opt, const Dataset& dataset) {
    if (!opt.model_file.empty()) {
        const TrainedModel model = TrainedModel::from_json(Json::parse(read_text_file(opt.model_file)));
        if (model.feature_count() != dataset.d) {
            throw DataError("model expects " + std::to_string(model.feature_count()) +
                            " features, dataset has " + std::to_string(dataset.d));
        }
        return model;
    }
    std::vector<int> train_idx, test_idx;
    split_train_test(dataset, opt.seed, opt.test_fraction, train_idx, test_idx);
    return train(dataset, train_idx, make_config(opt));
}

ShapleyResult mc_shapley_result(const TrainedModel& model, const Dataset& dataset, int instance,
                                int iterations, const BackgroundSpec& background,
                                std::uint64_t seed) {
    const auto x = dataset.row(instance);
    ShapleyResult result;
    result.instance_id = instance;
    result.method = ShapleyResult::Method::monte_carlo;
    result.iterations = iterations;
    result.seed = seed;
    result.background = background.mode_name();
    result.prediction = model.predict_proba(x);
    if (background.mode == BackgroundSpec::Mode::reference_vector) {
        result.baseline = model.predict_proba(background.reference);
    } else {
        double base = 0.0;
        for (const auto& z : background.samples) base += model.predict_proba(z);
        result.baseline = base / static_cast<double>(background.samples.size());
    }
    result.per_feature.resize(static_cast<std::size_t>(dataset.d));
    for (int i = 0; i < dataset.d; ++i) {
        result.per_feature[static_cast<std::size_t>(i)] =
            shapley_mc(model, x, i, iterations, background,
                       derive_stream(seed, static_cast<std::uint64_t>(instance),
                                     static_cast<std::uint64_t>(i)));
    }
    return result;
}

// ---------------------------------------------------------------- train --

int cmd_train(const CommonOptions& opt) {
    RunOutputs out("train", opt);
    const Dataset dataset = load_dataset(opt);

    std::vector<int> train_idx, test_idx;
    split_train_test(dataset, opt.seed, opt.test_fraction, train_idx, test_idx);
    const ModelConfig config = make_config(opt);
    const TrainedModel model = train(dataset, train_idx, config);

    const double train_acc = accuracy(model, dataset, train_idx);
    const double test_acc = accuracy(model, dataset, test_idx);

    Json metrics;
    metrics["model"] = model_kind_name(model.kind());
    metrics["n"] = dataset.n;
    metrics["d"] = dataset.d;
    metrics["n_train"] = static_cast<int>(train_idx.size());
    metrics["n_test"] = static_cast<int>(test_idx.size());
    metrics["gamma"] = model.gamma();
    metrics["l2_strength"] = config.l2_strength;
    metrics["seed"] = opt.seed;
    metrics["train_accuracy"] = round10(train_acc);
    metrics["test_accuracy"] = round10(test_acc);
    metrics["fingerprint"] = model.fingerprint();

    out.write_json("model.json", model.to_json());
    out.write_json("metrics.json", metrics);
    out.write_json("dataset_snapshot.json", dataset.snapshot_json());
    out.finish();

    std::printf("train: n=%d d=%d train_accuracy=%.4f test_accuracy=%.4f\n", dataset.n, dataset.d,
                train_acc, test_acc);
    return 0;
}

// ----------------------------------------------------------- horizontal --

int cmd_horizontal(const CommonOptions& opt, int parties, const std::string& method) {
    RunOutputs out("horizontal", opt);
    const Dataset dataset = load_dataset(opt);
    // The deletion experiment trains on the whole dataset; no held-out split.
    const HorizontalPartition partition = horizontal_split(dataset, parties, opt.seed);
    const ModelConfig config = make_config(opt);
    const std::vector<int> eval_set = all_indices(dataset.n);

    const InfluenceReport report =
        method == "summed-single"
            ? influence_group_summed(dataset, partition, config, eval_set)
            : influence_group_batch(dataset, partition, config, eval_set);

    out.write_json("influence.json", report.to_json());

    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& p : report.per_party) {
        labels.push_back("party " + std::to_string(p.party));
        values.push_back(round10(p.influence));
    }
    svg::BarChart chart;
    chart.title = "Instance-group influence (" + std::string(influence_method_name(report.method)) + ")";
    chart.y_label = "influence";
    chart.labels = labels;
    chart.values = values;
    out.write_text("influence_bars.svg", chart.render());

    if (opt.format == "csv") {
        std::ostringstream csv;
        csv << "party,size,influence\n";
        for (const auto& p : report.per_party) {
            csv << p.party << ',' << p.size << ',' << fmt_value(p.influence) << '\n';
        }
        out.write_text("influence.csv", csv.str());
    }
    out.finish();

    for (const auto& p : report.per_party) {
        std::printf("horizontal: party %d size %d influence %.6g\n", p.party, p.size, p.influence);
    }
    return 0;
}

// -------------------------------------------------------------- shapley --

svg::BarChart phi_bar_chart(const std::string& title, const Dataset& dataset,
                            const std::vector<double>& phi) {
    svg::BarChart chart;
    chart.title = title;
    chart.y_label = "phi";
    for (int i = 0; i < dataset.d; ++i) {
        chart.labels.push_back(dataset.feature_names[static_cast<std::size_t>(i)]);
        chart.values.push_back(round10(phi[static_cast<std::size_t>(i)]));
    }
    return chart;
}

int cmd_shapley(const CommonOptions& opt, int instance, bool all_instances,
                const std::string& method, int iterations, const std::string& background_mode) {
    RunOutputs out("shapley", opt);
    const Dataset dataset = load_dataset(opt);
    const TrainedModel model = obtain_model(opt, dataset);

    const bool exact = method == "exact";
    std::string mode = background_mode;
    if (mode == "auto") mode = exact ? "reference" : "sampled";
    const BackgroundSpec background = mode == "reference" ? BackgroundSpec::from_medians(dataset)
                                                          : BackgroundSpec::sampled(dataset);

    std::vector<int> targets;
    if (all_instances) {
        targets = all_indices(dataset.n);
    } else {
        if (instance < 0 || instance >= dataset.n) {
            throw DataError("unknown instance id " + std::to_string(instance));
        }
        targets.push_back(instance);
    }

    std::vector<ShapleyResult> results(targets.size());
    parallel_for(static_cast<int>(targets.size()), [&](int k) {
        const int id = targets[static_cast<std::size_t>(k)];
        if (exact) {
            ShapleyResult r = shapley_exact(model, dataset.row(id), background);
            r.instance_id = id;
            r.seed = opt.seed;
            results[static_cast<std::size_t>(k)] = std::move(r);
        } else {
            results[static_cast<std::size_t>(k)] =
                mc_shapley_result(model, dataset, id, iterations, background, opt.seed);
        }
    });

    if (!all_instances) {
        const ShapleyResult& r = results.front();
        out.write_json("shapley_instance_" + std::to_string(r.instance_id) + ".json",
                       r.to_json(dataset.feature_names));
        out.write_text("shapley_instance_" + std::to_string(r.instance_id) + "_bars.svg",
                       phi_bar_chart("Shapley values, instance " + std::to_string(r.instance_id),
                                     dataset, r.per_feature)
                           .render());
        out.finish();
        std::printf("shapley: instance %d prediction %.6f baseline %.6f sum_phi %.6f\n",
                    r.instance_id, r.prediction, r.baseline,
                    shapley_group_sum(r, all_indices(dataset.d)));
        return 0;
    }

    Json batch;
    batch["method"] = exact ? "exact" : "monte_carlo";
    batch["M"] = exact ? 0 : iterations;
    batch["seed"] = opt.seed;
    batch["background"] = background.mode_name();
    batch["instance_count"] = static_cast<int>(results.size());
    Json items = Json::array();
    for (const auto& r : results) items.push_back(r.to_json(dataset.feature_names));
    batch["results"] = std::move(items);
    out.write_json("shapley_batch.json", batch);

    // Scatter file: one row per (instance, feature).
    std::ostringstream scatter;
    scatter << "instance,feature,name,phi\n";
    for (const auto& r : results) {
        for (int i = 0; i < dataset.d; ++i) {
            scatter << r.instance_id << ',' << i << ','
                    << csv_quote(dataset.feature_names[static_cast<std::size_t>(i)]) << ','
                    << fmt_value(r.per_feature[static_cast<std::size_t>(i)]) << '\n';
        }
    }
    out.write_text("shapley_scatter.csv", scatter.str());

    svg::ScatterPlot plot;
    plot.title = "Shapley values per prediction";
    plot.x_label = "feature index";
    plot.y_label = "phi";
    for (const auto& r : results) {
        for (int i = 0; i < dataset.d; ++i) {
            plot.points.emplace_back(static_cast<double>(i),
                                     round10(r.per_feature[static_cast<std::size_t>(i)]));
        }
    }
    out.write_text("shapley_scatter.svg", plot.render());

    std::vector<double> mean_abs(static_cast<std::size_t>(dataset.d), 0.0);
    for (const auto& r : results) {
        for (int i = 0; i < dataset.d; ++i) {
            mean_abs[static_cast<std::size_t>(i)] += std::fabs(r.per_feature[static_cast<std::size_t>(i)]);
        }
    }
    for (auto& v : mean_abs) v /= static_cast<double>(results.size());
    out.write_text("shapley_mean_abs_bars.svg",
                   phi_bar_chart("Mean |phi| over all instances", dataset, mean_abs).render());

    if (opt.format == "csv") {
        std::ostringstream csv;
        csv << "feature,name,mean_abs_phi\n";
        for (int i = 0; i < dataset.d; ++i) {
            csv << i << ',' << csv_quote(dataset.feature_names[static_cast<std::size_t>(i)]) << ','
                << fmt_value(mean_abs[static_cast<std::size_t>(i)]) << '\n';
        }
        out.write_text("shapley_mean_abs.csv", csv.str());
    }
    out.finish();
    std::printf("shapley: %zu instances, %d features, scatter rows %zu\n", results.size(),
                dataset.d, results.size() * static_cast<std::size_t>(dataset.d));
    return 0;
}

// ------------------------------------------------------------- vertical --

std::vector<int> pick_instances(const Dataset& dataset, int requested, std::uint64_t seed) {
    if (requested <= 0 || requested >= dataset.n) return all_indices(dataset.n);
    std::vector<int> order = all_indices(dataset.n);
    Rng rng(derive_stream(seed, 0x696E7374ULL, static_cast<std::uint64_t>(requested)));
    rng.shuffle(order);
    order.resize(static_cast<std::size_t>(requested));
    std::sort(order.begin(), order.end());
    return order;
}

int cmd_vertical(const CommonOptions& opt, int groups, int iterations, int instances,
                 const std::string& method, const std::string& mode) {
    RunOutputs out("vertical", opt);
    const Dataset dataset = load_dataset(opt);
    const auto model = std::make_shared<const TrainedModel>(obtain_model(opt, dataset));

    const VerticalPartition partition = vertical_split(dataset, groups);
    Federation federation = Federation::assemble(dataset, partition);
    federation.register_model(model);

    const std::vector<int> chosen = pick_instances(dataset, instances, opt.seed);
    const GroupShapleyMethod gs_method =
        method == "exact" ? GroupShapleyMethod::exact : GroupShapleyMethod::monte_carlo;
    const bool simultaneous = mode == "all-at-once";

    std::vector<GroupShapleyReport> reports(chosen.size());
    parallel_for(static_cast<int>(chosen.size()), [&](int k) {
        const int id = chosen[static_cast<std::size_t>(k)];
        reports[static_cast<std::size_t>(k)] =
            simultaneous
                ? federated_group_shapley_simultaneous(federation, id, gs_method, iterations, opt.seed)
                : federated_group_shapley_all(federation, id, gs_method, iterations, opt.seed);
    });

    std::size_t transcript_total = 0;
    for (const auto& r : reports) transcript_total += r.transcript_length;

    // Per-party files: every instance's united-feature value plus the mean.
    std::vector<double> mean_phi(static_cast<std::size_t>(groups), 0.0);
    for (int g = 0; g < groups; ++g) {
        Json per_party;
        per_party["party"] = g;
        per_party["features"] = partition.feature_groups[static_cast<std::size_t>(g)];
        per_party["method"] = group_shapley_method_name(gs_method);
        per_party["M"] = gs_method == GroupShapleyMethod::exact ? 0 : iterations;
        per_party["seed"] = opt.seed;
        per_party["mode"] = simultaneous ? "all_at_once" : "per_party";
        Json rows = Json::array();
        double total = 0.0;
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const auto& report = reports[k];
            const auto it = std::find_if(report.per_party.begin(), report.per_party.end(),
                                         [g](const PartyAttribution& p) { return p.party == g; });
            if (it == report.per_party.end()) throw NumericError("party missing from report");
            Json row;
            row["instance_id"] = report.instance_index;
            row["phi"] = round10(it->phi);
            rows.push_back(std::move(row));
            total += it->phi;
        }
        mean_phi[static_cast<std::size_t>(g)] = total / static_cast<double>(reports.size());
        per_party["per_instance"] = std::move(rows);
        per_party["mean_phi"] = round10(mean_phi[static_cast<std::size_t>(g)]);
        out.write_json("vertical_party_" + std::to_string(g) + ".json", per_party);

        if (!simultaneous) {
            // Figure analogs: the reduced feature space seen when valuing
            // party g -- every other feature individually plus the united
            // block at its smallest member's slot.
            const int fed_slot = partition.feature_groups[static_cast<std::size_t>(g)].front();
            svg::ScatterPlot scatter;
            scatter.title = "Shapley values, party " + std::to_string(g) + " federated";
            scatter.x_label = "feature index (united block at " + std::to_string(fed_slot) + ")";
            scatter.y_label = "phi";
            std::vector<double> slot_totals(static_cast<std::size_t>(dataset.d), 0.0);
            for (const auto& report : reports) {
                const auto it = std::find_if(report.per_party.begin(), report.per_party.end(),
                                             [g](const PartyAttribution& p) { return p.party == g; });
                scatter.points.emplace_back(static_cast<double>(fed_slot), round10(it->phi));
                slot_totals[static_cast<std::size_t>(fed_slot)] += it->phi;
                for (const auto& o : it->other_features) {
                    scatter.points.emplace_back(static_cast<double>(o.feature), round10(o.phi));
                    slot_totals[static_cast<std::size_t>(o.feature)] += o.phi;
                }
            }
            out.write_text("vertical_party_" + std::to_string(g) + "_scatter.svg", scatter.render());

            svg::BarChart bars;
            bars.title = "Mean Shapley value, party " + std::to_string(g) + " federated";
            bars.y_label = "mean phi";
            for (int j = 0; j < dataset.d; ++j) {
                const bool owned =
                    std::find(partition.feature_groups[static_cast<std::size_t>(g)].begin(),
                              partition.feature_groups[static_cast<std::size_t>(g)].end(),
                              j) != partition.feature_groups[static_cast<std::size_t>(g)].end();
                if (owned && j != fed_slot) continue;
                bars.labels.push_back(owned ? ("party " + std::to_string(g) + " (united)")
                                            : dataset.feature_names[static_cast<std::size_t>(j)]);
                bars.values.push_back(round10(slot_totals[static_cast<std::size_t>(j)] /
                                              static_cast<double>(reports.size())));
            }
            out.write_text("vertical_party_" + std::to_string(g) + "_bars.svg", bars.render());
        }
    }

    Json combined;
    combined["mode"] = simultaneous ? "all_at_once" : "per_party";
    combined["method"] = group_shapley_method_name(gs_method);
    combined["M"] = gs_method == GroupShapleyMethod::exact ? 0 : iterations;
    combined["seed"] = opt.seed;
    combined["instance_count"] = static_cast<int>(chosen.size());
    combined["transcript_length"] = transcript_total;
    Json parties = Json::array();
    for (int g = 0; g < groups; ++g) {
        Json e;
        e["party"] = g;
        e["features"] = partition.feature_groups[static_cast<std::size_t>(g)];
        e["mean_phi"] = round10(mean_phi[static_cast<std::size_t>(g)]);
        parties.push_back(std::move(e));
    }
    combined["parties"] = std::move(parties);
    out.write_json("vertical_combined.json", combined);

    svg::BarChart chart;
    chart.title = "Party contribution (federated-feature Shapley)";
    chart.y_label = "mean phi";
    for (int g = 0; g < groups; ++g) {
        chart.labels.push_back("party " + std::to_string(g));
        chart.values.push_back(round10(mean_phi[static_cast<std::size_t>(g)]));
    }
    out.write_text("vertical_parties_bars.svg", chart.render());

    if (opt.format == "csv") {
        std::ostringstream csv;
        csv << "party,mean_phi\n";
        for (int g = 0; g < groups; ++g) {
            csv << g << ',' << fmt_value(mean_phi[static_cast<std::size_t>(g)]) << '\n';
        }
        out.write_text("vertical_parties.csv", csv.str());
    }
    out.finish();

    for (int g = 0; g < groups; ++g) {
        std::printf("vertical: party %d mean phi %.6g over %zu instances\n", g,
                    mean_phi[static_cast<std::size_t>(g)], chosen.size());
    }
    return 0;
}

// ---------------------------------------------------------------- audit --

int cmd_audit(const CommonOptions& opt, int groups, int iterations, int instance) {
    RunOutputs out("audit", opt);
    const Dataset dataset = load_dataset(opt);
    const auto model = std::make_shared<const TrainedModel>(obtain_model(opt, dataset));
    if (instance < 0 || instance >= dataset.n) {
        throw DataError("unknown instance id " + std::to_string(instance));
    }

    const VerticalPartition partition = vertical_split(dataset, groups);
    Federation federation = Federation::assemble(dataset, partition);
    federation.register_model(model);

    Transcript transcript(/*capture=*/true);
    const GroupShapleyReport report = federated_group_shapley_all(
        federation, instance, GroupShapleyMethod::monte_carlo, iterations, opt.seed, &transcript);
    const AuditVerdict verdict = privacy_audit(transcript);

    out.write_text("transcript.jsonl", transcript.to_jsonl());
    Json audit = verdict.to_json();
    audit["transcript_length"] = transcript.size();
    audit["instance_id"] = instance;
    audit["M"] = iterations;
    audit["seed"] = opt.seed;
    out.write_json("audit.json", audit);
    out.write_json("group_shapley.json", report.to_json(dataset.feature_names));
    out.finish();

    std::printf("audit: %s (%zu messages, %zu offending)\n", verdict.passed ? "PASS" : "FAIL",
                transcript.size(), verdict.offending.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"participant contribution measurement for federated learning experiments"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* train_cmd = app.add_subcommand("train", "70/30 split, fit, report accuracy");
    add_common_flags(train_cmd, opt, false);
    train_cmd->add_option("--test-fraction", opt.test_fraction, "held-out fraction");

    int parties = 5;
    std::string h_method = "batch-deletion";
    auto* horizontal_cmd =
        app.add_subcommand("horizontal", "deletion influence per party (full-data training)");
    add_common_flags(horizontal_cmd, opt, false);
    horizontal_cmd->add_option("--parties", parties, "number of horizontal parties");
    horizontal_cmd->add_option("--method", h_method, "group influence method")
        ->check(CLI::IsMember({"batch-deletion", "summed-single"}));

    int instance = 0;
    bool all_instances = false;
    std::string s_method = "exact";
    std::string background = "auto";
    int s_iterations = 2000;
    auto* shapley_cmd = app.add_subcommand("shapley", "per-feature Shapley attribution");
    add_common_flags(shapley_cmd, opt, true);
    shapley_cmd->add_option("--instance", instance, "instance id to explain");
    shapley_cmd->add_flag("--all", all_instances, "explain every instance");
    shapley_cmd->add_option("--method", s_method, "estimator")->check(CLI::IsMember({"exact", "mc"}));
    shapley_cmd->add_option("--iterations", s_iterations, "Monte-Carlo iterations");
    shapley_cmd->add_option("--background", background, "coalition background")
        ->check(CLI::IsMember({"auto", "reference", "sampled"}));

    int groups = 5;
    int v_iterations = 1000;
    int v_instances = 50;
    std::string v_method = "mc";
    std::string v_mode = "per-party";
    auto* vertical_cmd =
        app.add_subcommand("vertical", "federated-feature group Shapley per party");
    add_common_flags(vertical_cmd, opt, true);
    vertical_cmd->add_option("--groups", groups, "number of vertical parties");
    vertical_cmd->add_option("--iterations", v_iterations, "Monte-Carlo iterations per feature");
    vertical_cmd->add_option("--instances", v_instances,
                             "seeded subsample size (0 or >= n means all instances)");
    vertical_cmd->add_option("--method", v_method, "estimator")->check(CLI::IsMember({"exact", "mc"}));
    vertical_cmd->add_option("--mode", v_mode, "evaluate parties one at a time or all at once")
        ->check(CLI::IsMember({"per-party", "all-at-once"}));

    int a_groups = 5;
    int a_iterations = 20;
    int a_instance = 0;
    auto* audit_cmd =
        app.add_subcommand("audit", "captured-transcript privacy audit of a vertical run");
    add_common_flags(audit_cmd, opt, true);
    audit_cmd->add_option("--groups", a_groups, "number of vertical parties");
    audit_cmd->add_option("--iterations", a_iterations, "Monte-Carlo iterations per feature");
    audit_cmd->add_option("--instance", a_instance, "instance id to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(train_cmd)) return cmd_train(opt);
        if (app.got_subcommand(horizontal_cmd)) return cmd_horizontal(opt, parties, h_method);
        if (app.got_subcommand(shapley_cmd)) {
            return cmd_shapley(opt, instance, all_instances, s_method, s_iterations, background);
        }
        if (app.got_subcommand(vertical_cmd)) {
            return cmd_vertical(opt, groups, v_iterations, v_instances, v_method, v_mode);
        }
        if (app.got_subcommand(audit_cmd)) return cmd_audit(opt, a_groups, a_iterations, a_instance);
        throw UsageError("no subcommand");
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
