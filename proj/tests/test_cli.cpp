#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fedcontrib/json_io.hpp"

namespace fs = std::filesystem;
using fedcontrib::Json;

namespace {

const std::string kCli = FEDCONTRIB_CLI_BIN;
const std::string kBundled = std::string(FEDCONTRIB_DATA_DIR) + "/cervical_risk_factors.csv";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("fedcontrib_test_" + std::to_string(std::rand()) +
                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string str(const std::string& name = "") const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string command = "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Small fixture CSV for the heavier command paths.
void write_toy_csv(const std::string& path) {
    std::ofstream out(path);
    out << "a,b,c,d,y\n";
    const char* rows[] = {
        "0.9,0.1,0.5,0.2,1", "0.8,0.3,0.1,0.9,1", "0.2,0.8,0.4,0.4,0", "0.1,0.9,0.9,0.1,0",
        "0.7,0.2,0.6,0.7,1", "0.3,0.7,0.2,0.8,0", "0.6,0.4,0.8,0.3,1", "0.4,0.6,0.3,0.6,0",
        "0.5,0.5,0.7,0.5,1", "0.45,0.55,0.25,0.45,0", "0.85,0.15,0.65,0.35,1",
        "0.15,0.85,0.35,0.65,0",
    };
    for (const char* row : rows) out << row << "\n";
}

} // namespace

TEST_CASE("train: exit codes, metrics, determinism") {
    TempDir a, b;
    const std::string base = "train --data \"" + kBundled + "\" --seed 42";
    CHECK(run(base + " --out-dir " + a.str()) == 0);

    const auto metrics = Json::parse(slurp(a.str("metrics.json")));
    CHECK(metrics.at("n") == 858);
    CHECK(metrics.at("d") == 15);
    const double test_accuracy = metrics.at("test_accuracy").get<double>();
    CHECK(test_accuracy >= 0.0);
    CHECK(test_accuracy <= 1.0);
    CHECK(fs::exists(a.str("model.json")));
    CHECK(fs::exists(a.str("dataset_snapshot.json")));
    CHECK(fs::exists(a.str("manifest.json")));

    // Identical invocation -> identical metrics bytes.
    CHECK(run(base + " --out-dir " + b.str()) == 0);
    CHECK(slurp(a.str("metrics.json")) == slurp(b.str("metrics.json")));
    CHECK(slurp(a.str("model.json")) == slurp(b.str("model.json")));

    // Manifest lists every artifact.
    const auto manifest = Json::parse(slurp(a.str("manifest.json")));
    for (const auto& name : manifest.at("outputs")) {
        CHECK(fs::exists(a.str(name.get<std::string>())));
    }
}

TEST_CASE("exit code taxonomy") {
    TempDir dir;
    CHECK(run("train --data /no/such/file.csv --out-dir " + dir.str()) == 2);
    CHECK(run("train") == 1);                       // missing required flag
    CHECK(run("nonsense --data x") == 1);           // unknown subcommand
    CHECK(run("train --data \"" + kBundled + "\" --model bogus --out-dir " + dir.str()) == 1);
}

TEST_CASE("horizontal on a toy set matches the per-instance loop at k=n") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    // k=1 is degenerate: deleting the only party empties the training set.
    CHECK(run("horizontal --data " + csv + " --target y  --parties 1 --out-dir " + dir.str("k1")) == 2);

    CHECK(run("horizontal --data " + csv + " --target y  --parties 12 --seed 5 --l2 0.5 --out-dir " +
              dir.str("kn")) == 0);
    const auto report = Json::parse(slurp(dir.str("kn") + "/influence.json"));
    CHECK(report.at("parties").size() == 12);
    for (const auto& p : report.at("parties")) {
        CHECK(p.at("size") == 1);
        CHECK(p.at("influence").get<double>() >= 0.0);
    }

    // Singleton batch result equals summed-single per party.
    TempDir sum_dir;
    CHECK(run("horizontal --data " + csv + " --target y  --parties 12 --seed 5 --l2 0.5 --method "
              "summed-single --out-dir " + sum_dir.str()) == 0);
    const auto summed = Json::parse(slurp(sum_dir.str("influence.json")));
    for (std::size_t k = 0; k < 12; ++k) {
        CHECK(report.at("parties")[k].at("influence").get<double>() ==
              doctest::Approx(summed.at("parties")[k].at("influence").get<double>())
                  .epsilon(1e-10));
    }
}

TEST_CASE("shapley single instance: efficiency holds in the emitted report") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    CHECK(run("shapley --data " + csv + " --target y  --instance 3 --method exact --seed 9 --out-dir " +
              dir.str("s")) == 0);
    const auto report = Json::parse(slurp(dir.str("s") + "/shapley_instance_3.json"));
    double total = 0.0;
    for (const auto& v : report.at("values")) total += v.at("phi").get<double>();
    const double gap = report.at("prediction").get<double>() - report.at("baseline").get<double>();
    CHECK(total == doctest::Approx(gap).epsilon(1e-7)); // report values are rounded to 1e-10
    CHECK(fs::exists(dir.str("s") + "/shapley_instance_3_bars.svg"));

    CHECK(run("shapley --data " + csv + " --target y  --instance 99 --out-dir " + dir.str("bad")) == 2);
}

TEST_CASE("shapley batch emits one scatter row per instance-feature pair") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    CHECK(run("shapley --data " + csv + " --target y  --all --method mc --iterations 50 --seed 4 --out-dir " +
              dir.str("b")) == 0);
    const std::string scatter = slurp(dir.str("b") + "/shapley_scatter.csv");
    std::size_t rows = 0;
    for (char c : scatter) {
        if (c == '\n') ++rows;
    }
    CHECK(rows == 1 + 12 * 4); // header + n x d

    // Determinism across re-runs, including Monte-Carlo paths.
    TempDir again;
    CHECK(run("shapley --data " + csv + " --target y  --all --method mc --iterations 50 --seed 4 --out-dir " +
              again.str()) == 0);
    CHECK(slurp(dir.str("b") + "/shapley_batch.json") == slurp(again.str("shapley_batch.json")));
}

TEST_CASE("vertical: singleton groups match individual estimates and runs are byte-stable") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    const std::string base = "vertical --data " + csv + " --target y" +
                             " --groups 4 --iterations 80 --instances 6 --seed 3 --out-dir ";
    CHECK(run(base + dir.str("v1")) == 0);
    CHECK(run(base + dir.str("v2")) == 0);
    CHECK(slurp(dir.str("v1") + "/vertical_combined.json") ==
          slurp(dir.str("v2") + "/vertical_combined.json"));

    const auto combined = Json::parse(slurp(dir.str("v1") + "/vertical_combined.json"));
    CHECK(combined.at("parties").size() == 4);
    for (int g = 0; g < 4; ++g) {
        CHECK(fs::exists(dir.str("v1") + "/vertical_party_" + std::to_string(g) + ".json"));
    }

    // all-at-once mode works and reports every party.
    CHECK(run("vertical --data " + csv + " --target y" +
              " --groups 4 --iterations 40 --instances 3 --seed 3 --mode all-at-once --out-dir " +
              dir.str("sim")) == 0);
    const auto sim = Json::parse(slurp(dir.str("sim") + "/vertical_combined.json"));
    CHECK(sim.at("mode") == "all_at_once");
    CHECK(sim.at("parties").size() == 4);
}

TEST_CASE("audit passes on a standard run and writes the transcript") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    CHECK(run("audit --data " + csv + " --target y  --groups 2 --iterations 5 --seed 8 --out-dir " +
              dir.str("a")) == 0);
    const auto audit = Json::parse(slurp(dir.str("a") + "/audit.json"));
    CHECK(audit.at("passed") == true);
    CHECK(audit.at("offending").empty());
    CHECK(fs::exists(dir.str("a") + "/transcript.jsonl"));

    // Transcript length in the report equals the line count of the file.
    const std::string transcript = slurp(dir.str("a") + "/transcript.jsonl");
    std::size_t lines = 0;
    for (char c : transcript) {
        if (c == '\n') ++lines;
    }
    CHECK(audit.at("transcript_length").get<std::size_t>() == lines);
}

TEST_CASE("--format csv adds table files and they are listed in the manifest") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    CHECK(run("horizontal --data " + csv + " --target y --parties 3 --format csv --out-dir " +
              dir.str("h")) == 0);
    const std::string table = slurp(dir.str("h") + "/influence.csv");
    CHECK(table.rfind("party,size,influence\n", 0) == 0);
    const auto manifest = Json::parse(slurp(dir.str("h") + "/manifest.json"));
    bool listed = false;
    for (const auto& name : manifest.at("outputs")) {
        if (name.get<std::string>() == "influence.csv") listed = true;
    }
    CHECK(listed);

    // Sampled-background exact estimation through the flag surface.
    CHECK(run("shapley --data " + csv + " --target y --instance 1 --method exact "
              "--background sampled --out-dir " + dir.str("s")) == 0);
    const auto report = Json::parse(slurp(dir.str("s") + "/shapley_instance_1.json"));
    CHECK(report.at("background") == "sampled_background");
}

TEST_CASE("reports do not depend on the thread budget") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    const std::string args = "vertical --data " + csv +
                             " --target y --groups 4 --iterations 40 --instances 6 --seed 2";
    const std::string serial = "FEDCONTRIB_THREADS=1 \"" + kCli + "\" " + args + " --out-dir " +
                               dir.str("serial") + " > /dev/null 2>&1";
    const std::string wide = "FEDCONTRIB_THREADS=8 \"" + kCli + "\" " + args + " --out-dir " +
                             dir.str("wide") + " > /dev/null 2>&1";
    REQUIRE(std::system(serial.c_str()) == 0);
    REQUIRE(std::system(wide.c_str()) == 0);
    CHECK(slurp(dir.str("serial") + "/vertical_combined.json") ==
          slurp(dir.str("wide") + "/vertical_combined.json"));
}

TEST_CASE("model artifact round-trips through --model-file") {
    TempDir dir;
    const std::string csv = dir.str("toy.csv");
    write_toy_csv(csv);

    CHECK(run("train --data " + csv + " --target y  --seed 11 --out-dir " + dir.str("t")) == 0);
    CHECK(run("shapley --data " + csv + " --target y  --instance 0 --method exact --seed 11 --model-file " +
              dir.str("t") + "/model.json --out-dir " + dir.str("s1")) == 0);
    CHECK(run("shapley --data " + csv + " --target y  --instance 0 --method exact --seed 11 --out-dir " +
              dir.str("s2")) == 0);
    // In-process training reproduces the artifact path bit for bit.
    CHECK(slurp(dir.str("s1") + "/shapley_instance_0.json") ==
          slurp(dir.str("s2") + "/shapley_instance_0.json"));
}
