#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qtrack/errors.hpp"
#include "qtrack/metrics.hpp"
#include "qtrack/rng.hpp"

using namespace qtrack;
using namespace qtrack::metrics;
namespace fs = std::filesystem;

TEST_CASE("roc endpoints and separability") {
  // perfect separation
  auto roc = roc_curve(std::vector{0.9, 0.1}, std::vector{1, 0});
  CHECK(roc.fpr.front() == 0.0);
  CHECK(roc.tpr.front() == 0.0);
  CHECK(roc.fpr.back() == 1.0);
  CHECK(roc.tpr.back() == 1.0);
  CHECK(auc(std::vector{0.9, 0.1}, std::vector{1, 0}) == doctest::Approx(1.0));

  // perfectly wrong
  CHECK(auc(std::vector{0.1, 0.9}, std::vector{1, 0}) == doctest::Approx(0.0));

  // all tied: diagonal, AUC one half
  CHECK(auc(std::vector{0.4, 0.4, 0.4, 0.4}, std::vector{1, 0, 1, 0}) ==
        doctest::Approx(0.5));

  // labels used as scores rank perfectly
  CHECK(auc(std::vector{1.0, 0.0, 1.0, 0.0}, std::vector{1, 0, 1, 0}) ==
        doctest::Approx(1.0));

  CHECK_THROWS_AS(auc(std::vector{0.5, 0.6}, std::vector{1, 1}),
                  DegenerateClassError);
}

TEST_CASE("roc is monotone in both coordinates") {
  Rng rng(4);
  std::vector<double> scores(60);
  std::vector<int> labels(60);
  for (int i = 0; i < 60; ++i) {
    scores[i] = uniform01(rng);
    labels[i] = i % 3 == 0 ? 1 : 0;
  }
  const RocCurve roc = roc_curve(scores, labels);
  for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
    CHECK(roc.fpr[i] >= roc.fpr[i - 1]);
    CHECK(roc.tpr[i] >= roc.tpr[i - 1]);
  }
}

TEST_CASE("worked pairwise example") {
  // pairs: (0.8,0.6) correct, (0.8,0.2) correct, (0.4,0.6) wrong,
  // (0.4,0.2) correct -> 3/4
  CHECK(auc(std::vector{0.8, 0.6, 0.4, 0.2}, std::vector{1, 0, 1, 0}) ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("trapezoid equals the exhaustive pair statistic") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 199));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      // quantized scores so ties actually occur
      scores[i] = std::floor(uniform01(rng) * 8.0) / 8.0;
      labels[i] = uniform01(rng) < 0.5 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    CHECK(std::abs(auc(scores, labels) - oracles::pairwise_auc(scores, labels)) <
          1e-12);
  }
}

TEST_CASE("auc invariances") {
  Rng rng(13);
  std::vector<double> scores(40);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) {
    scores[i] = uniform01(rng);
    labels[i] = i % 2;
  }
  const double base = auc(scores, labels);

  // strictly increasing transform
  std::vector<double> squashed(40);
  for (int i = 0; i < 40; ++i) squashed[i] = std::tanh(3.0 * scores[i] - 1.0);
  CHECK(auc(squashed, labels) == doctest::Approx(base).epsilon(1e-12));

  // complement identity
  std::vector<double> complement(40);
  for (int i = 0; i < 40; ++i) complement[i] = 1.0 - scores[i];
  CHECK(base + auc(complement, labels) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("history aggregation across runs") {
  trainer::TrainHistory h;
  h.records.push_back({0, false, 0.0, true, 0.9, 0.5, 0.0});
  h.records.push_back({1, true, 0.8, false, 0.0, 0.0, 0.0});
  h.records.push_back({2, true, 0.6, true, 0.7, 0.6, 0.0});

  const fs::path dir = fs::temp_directory_path() / "qtrack_test_metrics";
  fs::create_directories(dir);

  // three identical runs: std column is all zeros
  emit_history({h, h, h}, dir / "same.csv");
  std::ifstream in(dir / "same.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,metric,mean,std,n_runs");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string step, metric, mean, stddev, n;
    std::getline(ss, step, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, stddev, ',');
    std::getline(ss, n, ',');
    CHECK(std::stod(stddev) < 1e-15);  // identical runs, up to one mean ulp
    CHECK(n == "3");
  }
  CHECK(rows > 0);

  // single run: mean equals the value
  emit_history({h}, dir / "one.csv");
  std::ifstream in1(dir / "one.csv");
  std::getline(in1, line);  // header
  bool saw_train = false;
  while (std::getline(in1, line)) {
    if (line.rfind("1,train_loss,", 0) == 0) {
      saw_train = true;
      CHECK(line.find("0.8") != std::string::npos);
    }
  }
  CHECK(saw_train);

  // mismatched grids are rejected
  trainer::TrainHistory other = h;
  other.records.pop_back();
  CHECK_THROWS_AS(emit_history({h, other}, dir / "bad.csv"), AlignmentError);
}

TEST_CASE("summary file appends with a single header") {
  const fs::path dir = fs::temp_directory_path() / "qtrack_test_summary";
  fs::remove_all(dir);
  fs::create_directories(dir);
  append_summary(dir / "s.csv", "quantum", "TTN", 1, 1, 42, 0.81);
  append_summary(dir / "s.csv", "classical", "", 5, 1, 100, 0.77);
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "model,ansatz,n_hidden,n_iterations,param_count,final_val_auc");
  std::getline(in, line);
  CHECK(line.rfind("quantum,TTN,1,1,42,", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("classical,,5,1,100,", 0) == 0);
  CHECK(!std::getline(in, line));
}
