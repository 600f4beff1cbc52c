#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefbench/nn/network.hpp"

namespace prefbench::nn {

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamParams hp);
  void step();
  int steps() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  AdamParams hp_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

/// A set of equally sized samples that can be stacked into a batch.
class SampleSet {
 public:
  virtual ~SampleSet() = default;
  virtual std::size_t size() const = 0;
  /// Group used for per-group metric averaging (the layout id in practice).
  virtual int group_of(std::size_t) const { return 0; }
  /// Writes indices.size() * nodes rows of model input and the matching
  /// 0/1 labels.
  virtual void assemble(std::span<const std::size_t> indices, Matrix& inputs,
                        std::vector<double>& labels) const = 0;
};

enum class PosWeightMode { Auto, Fixed };

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  int patience = 30;
  int batch_size = 16;
  std::uint64_t seed = 0;
  PosWeightMode pos_weight_mode = PosWeightMode::Auto;
  double pos_weight = 1.0;  // used when pos_weight_mode == Fixed

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_auprc = 0.0;   // mean of per-group AUPRC on the validation set
  double test_auprc = 0.0;  // same per-group mean; one group for a held-out layout
  double roc_auc = 0.0;     // pooled test ROC AUC
};

struct TrainResult {
  std::vector<EpochRecord> trace;
  int best_epoch = 0;
  bool stopped_early = false;

  const EpochRecord& best() const { return trace.at(static_cast<std::size_t>(best_epoch - 1)); }
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Patience-based stopping on validation loss (strict improvement only).
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);
  /// Records the loss of `epoch` (1-based); returns true if it is a new best.
  bool observe(int epoch, double val_loss);
  bool should_stop(int epoch) const { return best_epoch_ > 0 && epoch - best_epoch_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
};

struct Evaluation {
  double loss = 0.0;
  double group_mean_auprc = 0.0;
  double pooled_auprc = 0.0;
  double pooled_roc_auc = 0.0;
};

/// Forward pass over the whole set in batches; metrics pool every cell.
/// `sample_geom` describes a single sample (samples == 1).
Evaluation evaluate(Network& net, const SampleSet& set, const BatchGeometry& sample_geom,
                    const TrainConfig& cfg);

/// Mini-batch Adam training with early stopping. Leaves the network at the
/// parameters of the best validation-loss epoch. Throws TrainingDiverged on a
/// non-finite loss.
TrainResult train(Network& net, const SampleSet& train_set, const SampleSet& val_set,
                  const SampleSet* test_set, const BatchGeometry& sample_geom, const TrainConfig& cfg);

// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  /// A ReLU input or a prediction sat too close to a kink or clamp for the
  /// finite differences to be meaningful; resample the point.
  bool near_kink = false;
};

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

/// Central differences of the weighted BCE of the whole network against the
/// analytic gradient, over every parameter.
GradCheckResult grad_check(Network& net, const Matrix& x, const BatchGeometry& geom,
                           std::span<const double> labels, double pos_weight, double eps = 1e-5);

/// Central differences of L = sum(R .* layer(x)) for a fixed random R, over
/// every parameter and every input entry.
GradCheckResult grad_check_layer(Layer& layer, const Matrix& x, const BatchGeometry& geom, Rng& rng,
                                 double eps = 1e-5);

}  // namespace prefbench::nn
