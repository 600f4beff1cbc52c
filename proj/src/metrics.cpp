#include "prefbench/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace prefbench {

namespace {

void check_sizes(std::span<const double> scores, std::span<const double> labels, const char* name) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument(std::string(name) + ": scores and labels differ in length");
  }
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const double> labels) {
  check_sizes(scores, labels, "roc_auc");
  const auto order = descending_order(scores);
  double n_pos = 0.0, n_neg = 0.0;
  for (double y : labels) (y > 0.5 ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) throw MetricError("roc_auc: both classes must be present");

  // Walk blocks of equal score from the top. Every positive in a block beats
  // the negatives below it and ties with the negatives inside it.
  double concordant = 0.0;
  double neg_below = n_neg;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] > 0.5 ? pos : neg) += 1.0;
      ++j;
    }
    neg_below -= neg;
    concordant += pos * neg_below + 0.5 * pos * neg;
    i = j;
  }
  return concordant / (n_pos * n_neg);
}

double auprc(std::span<const double> scores, std::span<const double> labels) {
  check_sizes(scores, labels, "auprc");
  const auto order = descending_order(scores);
  double n_pos = 0.0;
  for (double y : labels) n_pos += y > 0.5 ? 1.0 : 0.0;
  if (n_pos == 0.0) throw MetricError("auprc: no positive labels");

  double tp = 0.0, fp = 0.0, prev_recall = 0.0, area = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] > 0.5 ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / n_pos;
    area += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return area;
}

double generalizability_score(double test_auprc, double avg_val_auprc) {
  if (!(avg_val_auprc > 0.0)) throw MetricError("generalizability score: validation AUPRC must be positive");
  return test_auprc / avg_val_auprc;
}

const ModelGs* GsSummary::find(const std::string& model) const {
  for (const auto& m : models)
    if (m.model == model) return &m;
  return nullptr;
}

GsSummary summarize_gs(std::span<const RunScore> runs, std::span<const std::string> models,
                       std::span<const std::pair<int, int>> folds, std::span<const std::string> agents) {
  GsSummary summary;
  for (const auto& model : models) {
    ModelGs mg;
    mg.model = model;
    double fold_total = 0.0;
    int fold_count = 0;
    for (auto [fold, layout] : folds) {
      FoldGs fg;
      fg.fold = fold;
      fg.test_layout = layout;
      double total = 0.0;
      for (const auto& agent : agents) {
        auto it = std::find_if(runs.begin(), runs.end(), [&](const RunScore& r) {
          return r.model == model && r.fold == fold && r.agent == agent;
        });
        if (it == runs.end() || !it->finished) continue;
        total += it->gs;
        ++fg.agents_finished;
      }
      if (fg.agents_finished > 0) {
        fg.gs = total / fg.agents_finished;
        fold_total += *fg.gs;
        ++fold_count;
      }
      if (fg.agents_finished != static_cast<int>(agents.size())) mg.complete = false;
      mg.folds.push_back(fg);
    }
    if (fold_count > 0) mg.overall_avg = fold_total / fold_count;
    summary.models.push_back(std::move(mg));
  }
  return summary;
}

}  // namespace prefbench
