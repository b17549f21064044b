// Writes the synthetic stand-in datasets bundled under data/:
//   jtpa_standin.csv        binary training take-up, 30-month earnings
//   head_start_standin.csv  three arms (0 none, 1 other preschool, 2 Head Start), PPVT score
// Both have a latent confounder that moves take-up and the outcome together.
//
// usage: make_standin_data <out_dir> [seed]

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "msmpolicy/dataset.hpp"
#include "msmpolicy/random.hpp"
#include "msmpolicy/stats.hpp"

using msmpolicy::Observation;
using msmpolicy::Rng;
using msmpolicy::sigmoid;

namespace {

double round_to(double v, double step) { return std::round(v / step) * step; }

msmpolicy::Dataset jtpa(std::uint64_t seed) {
  constexpr std::size_t kN = 9223;
  Rng rng(seed);
  std::vector<Observation> rows;
  rows.reserve(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    const double edu = std::clamp(std::round(rng.normal(11.6, 1.9)), 7.0, 18.0);
    const bool no_earnings = rng.bernoulli(0.28);
    const double prev = no_earnings ? 0.0 : round_to(std::min(std::exp(rng.normal(7.9, 1.0)), 60000.0), 10.0);
    const double age = std::round(rng.uniform(22.0, 55.0));
    const double married = rng.bernoulli(0.35) ? 1.0 : 0.0;
    const double black = rng.bernoulli(0.25) ? 1.0 : 0.0;
    const double hispanic = black > 0 ? 0.0 : (rng.bernoulli(0.12) ? 1.0 : 0.0);
    const int u = rng.bernoulli(0.5) ? 1 : 0;  // motivation

    const double eligible = rng.bernoulli(2.0 / 3.0) ? 1.0 : 0.0;
    const double lin = -0.4 + 0.12 * (edu - 11.6) - 0.00002 * prev + 0.9 * (u - 0.5);
    const int a = eligible > 0 && rng.bernoulli(sigmoid(lin + 1.0)) ? 1 : 0;

    const double effect = 900.0 + 350.0 * (edu - 11.6) - 0.04 * prev;
    double y = 9000.0 + 1300.0 * (edu - 11.6) + 0.9 * prev + 60.0 * (age - 35.0) + 1500.0 * married -
               900.0 * black + 3500.0 * (u - 0.5) + a * effect + rng.normal(0.0, 7000.0);
    y = round_to(std::max(y, 0.0), 1.0);
    rows.push_back({{edu, prev, age, married, black, hispanic}, a, y});
  }
  return msmpolicy::validate_dataset(std::move(rows), 2,
                                     {"edu", "prev_earnings", "age", "married", "black", "hispanic"});
}

msmpolicy::Dataset head_start(std::uint64_t seed) {
  constexpr std::size_t kN = 3826;
  Rng rng(seed);
  std::vector<Observation> rows;
  rows.reserve(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    const double income = std::round(100.0 * rng.uniform());
    const double male = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double birth_wt = round_to(std::clamp(rng.normal(7.3 + 0.004 * (income - 50.0), 1.3), 2.5, 11.5), 0.1);
    const double entry_wt = round_to(std::clamp(rng.normal(35.0 + 1.6 * (birth_wt - 7.3), 4.5), 22.0, 60.0), 0.5);
    const double firstborn = rng.bernoulli(0.4) ? 1.0 : 0.0;
    const double mother_grade = std::clamp(std::round(rng.normal(11.5 + 0.025 * (income - 50.0), 1.8)), 6.0, 18.0);
    const double afqt = std::clamp(std::round(rng.normal(30.0 + 0.35 * (income - 50.0) + 4.0 * (mother_grade - 11.5), 18.0)), 1.0, 99.0);
    const double siblings = std::min(static_cast<double>(rng.below(9)), std::round(std::abs(rng.normal(3.0, 2.0))));
    const double hh_low = static_cast<double>(rng.below(mother_grade < 12 ? 4 : 2));
    const double hh_high = static_cast<double>(rng.below(income > 60 ? 3 : 2));
    const double race = rng.uniform();
    const double white = race < 0.45 ? 1.0 : 0.0;
    const double hispanic = race >= 0.45 && race < 0.65 ? 1.0 : 0.0;
    const double black = race >= 0.65 ? 1.0 : 0.0;
    const int u = rng.bernoulli(0.5) ? 1 : 0;  // home investment

    // Multinomial logit over (none, other preschool, Head Start).
    const double disadv = (50.0 - income) / 25.0;
    const double s_other = 0.7 + 0.3 * (income - 50.0) / 25.0 + 0.6 * (u - 0.5);
    const double s_hs = -0.6 + 0.8 * disadv + 0.3 * black + 0.5 * (u - 0.5);
    const double z = 1.0 + std::exp(s_other) + std::exp(s_hs);
    const double p_other = std::exp(s_other) / z;
    const double p_hs = std::exp(s_hs) / z;
    const double draw = rng.uniform();
    const int a = draw < p_hs ? 2 : (draw < p_hs + p_other ? 1 : 0);

    const double base = -0.1 + 0.012 * (income - 50.0) + 0.012 * (afqt - 30.0) + 0.05 * (mother_grade - 11.5) +
                        0.04 * (birth_wt - 7.3) - 0.1 * male + 0.4 * (u - 0.5);
    const double gain_other = 0.12 + 0.002 * (income - 50.0);
    const double gain_hs = 0.15 - 0.006 * (income - 50.0) - 0.004 * (afqt - 30.0) - 0.02 * (entry_wt - 35.0);
    const double y = base + (a == 1 ? gain_other : 0.0) + (a == 2 ? gain_hs : 0.0) + rng.normal(0.0, 0.8);
    rows.push_back({{income, male, birth_wt, entry_wt, firstborn, mother_grade, afqt, siblings, hh_low, hh_high,
                     white, hispanic, black},
                    a, y});
  }
  return msmpolicy::validate_dataset(std::move(rows), 3,
                                     {"income_pctl", "male", "birth_wt", "entry_wt", "firstborn", "mother_grade",
                                      "mother_afqt", "mother_siblings", "hh_lt12_edu", "hh_ge16_edu", "white",
                                      "hispanic", "black"});
}

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "cannot write " << path << '\n';
    std::exit(2);
  }
  std::cout << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_standin_data <out_dir> [seed]\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2024;
  std::filesystem::create_directories(dir);
  write(dir / "jtpa_standin.csv", msmpolicy::dataset_to_csv(jtpa(msmpolicy::mix_seed(seed, 1))));
  write(dir / "head_start_standin.csv", msmpolicy::dataset_to_csv(head_start(msmpolicy::mix_seed(seed, 2))));
  return 0;
}
