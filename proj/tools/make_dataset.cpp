// Regenerates data/cervical_risk_factors.csv, a synthetic sample that
// follows the UCI cervical-cancer (risk factors) attribute schema: the 15
// risk-factor columns plus the binary "Biopsy" target, 858 rows, "?" for
// missing cells. Generation is seeded, so the checked-in file is
// reproducible byte for byte.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fedcontrib/json_io.hpp"
#include "fedcontrib/rng.hpp"

using fedcontrib::Rng;

namespace {

constexpr std::uint64_t kSeed = 0x5EED5EED2024ULL;
constexpr int kRows = 858;

struct Person {
    int age = 0;
    int partners = 0;
    int first_intercourse = 0;
    int pregnancies = 0;
    int smokes = 0;
    int smokes_years = 0;
    int hormonal = 0;
    int hormonal_years = 0;
    int iud = 0;
    int iud_years = 0;
    int stds = 0;
    int stds_number = 0;
    int stds_diagnoses = 0;
    int time_first_diag = -1; // -1 encodes missing
    int time_last_diag = -1;
    int biopsy = 0;
};

int clamp_int(double v, int lo, int hi) {
    const int r = static_cast<int>(std::lround(v));
    return r < lo ? lo : (r > hi ? hi : r);
}

double gaussian(Rng& rng) {
    // Box-Muller; both uniforms drawn every call to keep the stream regular.
    const double u1 = std::max(rng.uniform01(), 1e-12);
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int geometric(Rng& rng, double p, int cap) {
    int k = 0;
    while (k < cap && rng.uniform01() > p) ++k;
    return k;
}

Person sample_person(Rng& rng) {
    Person p;
    p.age = clamp_int(27.0 + 8.5 * gaussian(rng), 13, 84);
    p.partners = 1 + geometric(rng, 0.45, 27);
    p.first_intercourse = clamp_int(17.0 + 2.8 * gaussian(rng), 10, std::max(10, p.age));
    p.pregnancies = geometric(rng, 0.35, 11);

    p.smokes = rng.uniform01() < 0.145 ? 1 : 0;
    if (p.smokes) p.smokes_years = clamp_int(1.0 + 9.0 * rng.uniform01() * rng.uniform01() * 4.0,
                                             1, std::max(1, p.age - 14));

    p.hormonal = rng.uniform01() < 0.64 ? 1 : 0;
    if (p.hormonal) p.hormonal_years = clamp_int(-3.0 * std::log(std::max(rng.uniform01(), 1e-12)), 0, 30);

    p.iud = rng.uniform01() < 0.11 ? 1 : 0;
    if (p.iud) p.iud_years = clamp_int(1.0 - 4.0 * std::log(std::max(rng.uniform01(), 1e-12)), 1, 19);

    p.stds = rng.uniform01() < 0.095 ? 1 : 0;
    if (p.stds) {
        p.stds_number = 1 + geometric(rng, 0.6, 3);
        p.stds_diagnoses = 1 + geometric(rng, 0.75, 2);
        p.time_first_diag = 1 + geometric(rng, 0.18, 21);
        p.time_last_diag = std::max(1, p.time_first_diag - geometric(rng, 0.4, 8));
    }

    // Latent risk combining the classic factors; intercept calibrated so
    // positives land near the real file's ~6% rate.
    double risk = -3.55;
    risk += 0.020 * (p.age - 27);
    risk += 0.090 * (p.partners - 2);
    risk -= 0.045 * (p.first_intercourse - 17);
    risk += 0.060 * p.pregnancies;
    risk += 0.55 * p.smokes + 0.035 * p.smokes_years;
    risk += 0.030 * p.hormonal_years;
    risk += 0.35 * p.iud;
    risk += 0.50 * p.stds + 0.28 * p.stds_number;
    risk += 0.35 * gaussian(rng);
    const double prob = 1.0 / (1.0 + std::exp(-risk));
    p.biopsy = rng.uniform01() < prob ? 1 : 0;
    return p;
}

std::string cell(int v, bool missing) { return missing ? "?" : std::to_string(v); }

} // namespace

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : "data/cervical_risk_factors.csv";

    Rng rng(kSeed);
    std::ostringstream out;
    out << "Age,Number of sexual partners,First sexual intercourse,Num of pregnancies,"
           "Smokes,Smokes (years),Hormonal Contraceptives,Hormonal Contraceptives (years),"
           "IUD,IUD (years),STDs,STDs (number),STDs: Number of diagnosis,"
           "STDs: Time since first diagnosis,STDs: Time since last diagnosis,Biopsy\n";

    int positives = 0;
    for (int i = 0; i < kRows; ++i) {
        const Person p = sample_person(rng);
        positives += p.biopsy;
        // Sparse "?" holes in the self-reported columns, mirroring the
        // shape of the real file (the two STDs-time columns are mostly
        // missing because they only apply after a diagnosis).
        const bool miss_partners = rng.uniform01() < 0.025;
        const bool miss_first = rng.uniform01() < 0.008;
        const bool miss_pregnancies = rng.uniform01() < 0.055;
        const bool miss_hormonal_years = rng.uniform01() < 0.02;

        out << cell(p.age, false) << ',' << cell(p.partners, miss_partners) << ','
            << cell(p.first_intercourse, miss_first) << ',' << cell(p.pregnancies, miss_pregnancies)
            << ',' << cell(p.smokes, false) << ',' << cell(p.smokes_years, false) << ','
            << cell(p.hormonal, false) << ',' << cell(p.hormonal_years, miss_hormonal_years) << ','
            << cell(p.iud, false) << ',' << cell(p.iud_years, false) << ',' << cell(p.stds, false)
            << ',' << cell(p.stds_number, false) << ',' << cell(p.stds_diagnoses, false) << ','
            << cell(p.time_first_diag, p.time_first_diag < 0) << ','
            << cell(p.time_last_diag, p.time_last_diag < 0) << ',' << cell(p.biopsy, false)
            << '\n';
    }

    fedcontrib::write_text_file(path, out.str());
    std::printf("wrote %s: %d rows, %d positive\n", path.c_str(), kRows, positives);
    return 0;
}
