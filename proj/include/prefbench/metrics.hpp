#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prefbench {

class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mann-Whitney ROC AUC: (concordant + 0.5 * tied) / (n_pos * n_neg).
/// Labels are 0/1. Throws MetricError if a class is absent.
double roc_auc(std::span<const double> scores, std::span<const double> labels);

/// Average precision: sum over descending score blocks of
/// (R_block - R_prev) * P_block, where tied scores form one block evaluated at
/// its end. Throws MetricError without positives.
double auprc(std::span<const double> scores, std::span<const double> labels);

/// Unseen-layout AUPRC divided by the mean validation AUPRC on the seen
/// layouts. Values above 1 are legitimate.
double generalizability_score(double test_auprc, double avg_val_auprc);

/// Outcome of one (model, fold, agent) training run.
struct RunScore {
  std::string model;
  int fold = 0;
  int test_layout = 0;
  std::string agent;
  bool finished = false;  // false: diverged or missing
  double test_auprc = 0.0;
  double avg_val_auprc = 0.0;
  double gs = 0.0;
};

struct FoldGs {
  int fold = 0;
  int test_layout = 0;
  std::optional<double> gs;  // mean over the finished agents of this fold
  int agents_finished = 0;
};

struct ModelGs {
  std::string model;
  std::vector<FoldGs> folds;
  std::optional<double> overall_avg;  // mean over folds that have a value
  bool complete = true;               // every fold has every agent
};

struct GsSummary {
  std::vector<ModelGs> models;
  const ModelGs* find(const std::string& model) const;
};

/// Averages GS over agents within each fold, then over folds. `models`,
/// `folds` (fold id -> test layout) and `agents` fix the expected grid; any
/// combination missing from `runs` or not finished counts as a gap.
GsSummary summarize_gs(std::span<const RunScore> runs, std::span<const std::string> models,
                       std::span<const std::pair<int, int>> folds, std::span<const std::string> agents);

}  // namespace prefbench
