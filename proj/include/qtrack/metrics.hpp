#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qtrack/trainer.hpp"

namespace qtrack::metrics {

// One point per distinct score threshold (ties grouped) plus the (0,0) and
// (1,1) endpoints; fpr/tpr are nondecreasing as thresholds descend.
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr, tpr;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area under the ROC; with tie grouping this equals the
// Mann-Whitney pair statistic (ties counted 1/2).
double auc(std::span<const double> scores, std::span<const int> labels);

// Writes per-step mean and std across runs for each metric.
// CSV: step,metric,mean,std,n_runs. Throws AlignmentError if the runs'
// step grids differ.
void emit_history(const std::vector<trainer::TrainHistory>& histories,
                  const std::filesystem::path& path);

// Appends one row to the model-comparison summary, creating the file (and
// header) on first use. CSV:
// model,ansatz,n_hidden,n_iterations,param_count,final_val_auc
void append_summary(const std::filesystem::path& path, const std::string& model,
                    const std::string& ansatz, int n_hidden, int n_iterations,
                    std::size_t param_count, double final_val_auc);

}  // namespace qtrack::metrics
