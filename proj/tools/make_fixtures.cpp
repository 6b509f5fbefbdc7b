// Writes synthetic Gaussian fixtures: in-scope N(0,1)^d, out-of-scope
// N(shift,1)^d, a labelled calibration mix and a ramp stream.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "sddmon/sddmon.hpp"

namespace {

sddmon::FeatureMatrix gaussian(std::size_t rows, std::size_t d, double shift, std::uint8_t label,
                               std::mt19937_64& eng, bool with_labels) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> data(rows * d);
  for (auto& v : data) v = nd(eng) + shift;
  std::optional<std::vector<std::uint8_t>> lab;
  if (with_labels) lab = std::vector<std::uint8_t>(rows, label);
  return sddmon::FeatureMatrix(rows, d, std::move(data), std::move(lab));
}

sddmon::FeatureMatrix concat(const sddmon::FeatureMatrix& a, const sddmon::FeatureMatrix& b) {
  std::vector<double> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  std::vector<std::uint8_t> lab(a.labels()->begin(), a.labels()->end());
  lab.insert(lab.end(), b.labels()->begin(), b.labels()->end());
  return sddmon::FeatureMatrix(a.rows() + b.rows(), a.cols(), std::move(data), std::move(lab));
}

void write(const std::filesystem::path& p, const sddmon::FeatureMatrix& x) {
  std::ofstream out(p);
  sddmon::write_feature_csv(out, x);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"make_fixtures: synthetic feature CSVs"};
  std::string dir = ".";
  std::size_t d = 5, rows = 1000;
  double shift = 3.0;
  std::uint64_t seed = 1;
  app.add_option("--dir", dir);
  app.add_option("--dim", d);
  app.add_option("--rows", rows);
  app.add_option("--shift", shift);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(dir);
  std::mt19937_64 eng(seed);
  const std::filesystem::path base(dir);
  write(base / "train.csv", gaussian(rows, d, 0.0, 1, eng, false));
  write(base / "ood.csv", gaussian(rows, d, shift, 0, eng, false));
  write(base / "cal.csv", concat(gaussian(rows, d, 0.0, 1, eng, true),
                                 gaussian(rows, d, shift, 0, eng, true)));
  // Ramp: 20 blocks of 50, block b holding b*50/19 (rounded) out-of-scope rows.
  std::vector<std::vector<double>> ramp;
  std::vector<std::uint8_t> labels;
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t b = 0; b < 20; ++b) {
    const std::size_t bad = (b * 50 + 9) / 19;
    for (std::size_t i = 0; i < 50; ++i) {
      const bool out = i < bad;
      std::vector<double> r(d);
      for (auto& v : r) v = nd(eng) + (out ? shift : 0.0);
      ramp.push_back(std::move(r));
      labels.push_back(out ? 0 : 1);
    }
  }
  write(base / "stream.csv", sddmon::FeatureMatrix::from_rows(ramp, labels));
  std::cout << "wrote train.csv ood.csv cal.csv stream.csv to " << dir << '\n';
  return 0;
}
