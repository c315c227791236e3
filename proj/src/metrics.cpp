#include "qtrack/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "qtrack/errors.hpp"

namespace qtrack::metrics {

namespace {

void write_full(std::ostream& os, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  os.write(buf, end - buf);
}

void check_classes(std::span<const int> labels) {
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw DegenerateClassError("need at least one positive and one negative label");
  }
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ArityError("roc_curve: scores/labels length mismatch");
  }
  check_classes(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double n_pos = 0.0, n_neg = 0.0;
  for (int y : labels) (y ? n_pos : n_neg) += 1.0;

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // group ties: everything at this score flips together
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]]) tp += 1.0; else fp += 1.0;
      ++i;
    }
    curve.thresholds.push_back(threshold);
    curve.fpr.push_back(fp / n_neg);
    curve.tpr.push_back(tp / n_pos);
  }
  return curve;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  const RocCurve curve = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
    area += (curve.fpr[i] - curve.fpr[i - 1]) *
            (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
  }
  return area;
}

void emit_history(const std::vector<trainer::TrainHistory>& histories,
                  const std::filesystem::path& path) {
  if (histories.empty()) throw ArityError("emit_history: no histories");

  struct MetricSeries {
    const char* name;
    // per run: step -> value
    std::vector<std::map<long, double>> runs;
  };
  MetricSeries series[3] = {{"train_loss", {}}, {"val_loss", {}}, {"val_auc", {}}};
  for (const auto& h : histories) {
    std::map<long, double> train, vloss, vauc;
    for (const auto& rec : h.records) {
      if (rec.has_train) train[rec.step] = rec.train_loss;
      if (rec.has_val) {
        vloss[rec.step] = rec.val_loss;
        vauc[rec.step] = rec.val_auc;
      }
    }
    series[0].runs.push_back(std::move(train));
    series[1].runs.push_back(std::move(vloss));
    series[2].runs.push_back(std::move(vauc));
  }
  for (const auto& s : series) {
    for (std::size_t r = 1; r < s.runs.size(); ++r) {
      if (s.runs[r].size() != s.runs[0].size() ||
          !std::equal(s.runs[r].begin(), s.runs[r].end(), s.runs[0].begin(),
                      [](const auto& a, const auto& b) { return a.first == b.first; })) {
        throw AlignmentError(std::string("emit_history: runs disagree on the ") +
                             s.name + " step grid");
      }
    }
  }

  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "step,metric,mean,std,n_runs\n";
  const std::size_t n_runs = histories.size();
  for (const auto& s : series) {
    for (const auto& [step, first_value] : s.runs[0]) {
      double mean = 0.0;
      for (const auto& run : s.runs) mean += run.at(step);
      mean /= static_cast<double>(n_runs);
      double var = 0.0;
      for (const auto& run : s.runs) {
        const double dev = run.at(step) - mean;
        var += dev * dev;
      }
      var /= static_cast<double>(n_runs);
      os << step << ',' << s.name << ',';
      write_full(os, mean);
      os << ',';
      write_full(os, std::sqrt(var));
      os << ',' << n_runs << '\n';
    }
  }
}

void append_summary(const std::filesystem::path& path, const std::string& model,
                    const std::string& ansatz, int n_hidden, int n_iterations,
                    std::size_t param_count, double final_val_auc) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot write " + path.string());
  if (fresh) os << "model,ansatz,n_hidden,n_iterations,param_count,final_val_auc\n";
  os << model << ',' << ansatz << ',' << n_hidden << ',' << n_iterations << ','
     << param_count << ',';
  write_full(os, final_val_auc);
  os << '\n';
}

}  // namespace qtrack::metrics
