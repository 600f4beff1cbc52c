#include "prefbench/nn/trainer.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "prefbench/metrics.hpp"
#include "prefbench/nn/loss.hpp"

namespace prefbench::nn {

Adam::Adam(std::vector<Tensor*> params, AdamParams hp) : params_(std::move(params)), hp_(hp) {
  for (Tensor* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(hp_.beta1, t_);
  const double c2 = 1.0 - std::pow(hp_.beta2, t_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = hp_.beta1 * m[i] + (1.0 - hp_.beta1) * g;
      v[i] = hp_.beta2 * v[i] + (1.0 - hp_.beta2) * g * g;
      p.data[i] -= hp_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + hp_.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (pos_weight_mode == PosWeightMode::Fixed && !(pos_weight > 0.0)) {
    throw std::invalid_argument("TrainConfig: fixed pos_weight must be > 0");
  }
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw std::invalid_argument("EarlyStopping: patience must be >= 1");
}

bool EarlyStopping::observe(int epoch, double val_loss) {
  if (best_epoch_ == 0 || val_loss < best_loss_) {
    best_epoch_ = epoch;
    best_loss_ = val_loss;
    return true;
  }
  return false;
}

namespace {

double batch_pos_weight(const TrainConfig& cfg, std::span<const double> labels) {
  return cfg.pos_weight_mode == PosWeightMode::Auto ? auto_pos_weight(labels) : cfg.pos_weight;
}

std::span<const double> as_span(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

Evaluation evaluate(Network& net, const SampleSet& set, const BatchGeometry& sample_geom,
                    const TrainConfig& cfg) {
  if (set.size() == 0) throw std::invalid_argument("evaluate: empty sample set");
  const auto nodes = static_cast<std::size_t>(sample_geom.nodes);
  std::vector<double> preds, labels, batch_labels;
  std::vector<int> groups;
  preds.reserve(set.size() * nodes);
  Matrix x;
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < set.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
    idx.resize(std::min(static_cast<std::size_t>(cfg.batch_size), set.size() - b));
    std::iota(idx.begin(), idx.end(), b);
    set.assemble(idx, x, batch_labels);
    BatchGeometry g = sample_geom;
    g.samples = static_cast<int>(idx.size());
    const Matrix& p = net.forward(x, g);
    preds.insert(preds.end(), p.data(), p.data() + p.size());
    labels.insert(labels.end(), batch_labels.begin(), batch_labels.end());
    for (std::size_t i : idx) groups.insert(groups.end(), nodes, set.group_of(i));
  }

  Evaluation ev;
  ev.loss = weighted_bce(preds, labels, batch_pos_weight(cfg, labels));
  ev.pooled_auprc = auprc(preds, labels);
  ev.pooled_roc_auc = roc_auc(preds, labels);

  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_group;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& [gp, gl] = by_group[groups[i]];
    gp.push_back(preds[i]);
    gl.push_back(labels[i]);
  }
  double total = 0.0;
  for (const auto& [g, pl] : by_group) total += auprc(pl.first, pl.second);
  ev.group_mean_auprc = total / static_cast<double>(by_group.size());
  return ev;
}

TrainResult train(Network& net, const SampleSet& train_set, const SampleSet& val_set,
                  const SampleSet* test_set, const BatchGeometry& sample_geom, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw std::invalid_argument("train: training and validation sets must be non-empty");
  }
  Adam opt(net.params(), AdamParams{cfg.learning_rate});
  EarlyStopping stopper(cfg.patience);
  Rng order_rng(cfg.seed, {key_of("batches")});

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix x, d_logits;
  std::vector<double> labels;
  std::vector<std::vector<double>> best_params = net.snapshot();

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0, rows = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const auto idx = std::span<const std::size_t>(order).subspan(
          b, std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - b));
      train_set.assemble(idx, x, labels);
      BatchGeometry g = sample_geom;
      g.samples = static_cast<int>(idx.size());

      const Matrix& p = net.forward(x, g);
      const double pw = batch_pos_weight(cfg, labels);
      const double loss = weighted_bce(as_span(p), labels, pw);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("non-finite training loss at epoch " + std::to_string(epoch) +
                               ", batch starting at " + std::to_string(b));
      }
      d_logits.resize(p.rows(), p.cols());
      weighted_bce_logit_grad(as_span(p), labels, pw, {d_logits.data(), static_cast<std::size_t>(d_logits.size())});
      net.zero_grad();
      net.backward_from_logits(d_logits, g);
      opt.step();
      loss_sum += loss * static_cast<double>(p.size());
      rows += static_cast<double>(p.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / rows;
    const Evaluation val = evaluate(net, val_set, sample_geom, cfg);
    if (!std::isfinite(val.loss)) {
      throw TrainingDiverged("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    rec.val_loss = val.loss;
    rec.val_auprc = val.group_mean_auprc;
    if (test_set != nullptr) {
      const Evaluation test = evaluate(net, *test_set, sample_geom, cfg);
      rec.test_auprc = test.group_mean_auprc;
      rec.roc_auc = test.pooled_roc_auc;
    }
    result.trace.push_back(rec);

    if (stopper.observe(epoch, rec.val_loss)) best_params = net.snapshot();
    if (stopper.should_stop(epoch)) {
      result.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  net.restore(best_params);
  result.best_epoch = stopper.best_epoch();
  return result;
}

// ---------------------------------------------------------------------------

namespace {

double network_loss(Network& net, const Matrix& x, const BatchGeometry& geom,
                    std::span<const double> labels, double pos_weight) {
  return weighted_bce(as_span(net.forward(x, geom)), labels, pos_weight);
}

}  // namespace

GradCheckResult grad_check(Network& net, const Matrix& x, const BatchGeometry& geom,
                           std::span<const double> labels, double pos_weight, double eps) {
  GradCheckResult result;
  const Matrix& p = net.forward(x, geom);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p.data()[i] < 1e3 * kBceClamp || p.data()[i] > 1.0 - 1e3 * kBceClamp) result.near_kink = true;
  }
  if (net.min_abs_relu_input() < 1e-4) result.near_kink = true;

  Matrix d_logits(p.rows(), p.cols());
  weighted_bce_logit_grad(as_span(p), labels, pos_weight, {d_logits.data(), static_cast<std::size_t>(d_logits.size())});
  net.zero_grad();
  net.backward_from_logits(d_logits, geom);

  for (Tensor* t : net.params()) {
    const std::vector<double> analytic = t->grad;
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double saved = t->data[i];
      t->data[i] = saved + eps;
      const double up = network_loss(net, x, geom, labels, pos_weight);
      t->data[i] = saved - eps;
      const double down = network_loss(net, x, geom, labels, pos_weight);
      t->data[i] = saved;
      result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic[i], (up - down) / (2.0 * eps)));
    }
  }
  return result;
}

GradCheckResult grad_check_layer(Layer& layer, const Matrix& x, const BatchGeometry& geom, Rng& rng,
                                 double eps) {
  GradCheckResult result;
  if (layer.kind().type == LayerType::ReLU && x.cwiseAbs().minCoeff() < 1e-4) result.near_kink = true;

  Matrix input = x;
  const Matrix& y0 = layer.forward(input, geom);
  Matrix r(y0.rows(), y0.cols());
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.uniform(-1.0, 1.0);
  auto loss = [&]() { return layer.forward(input, geom).cwiseProduct(r).sum(); };

  for (Tensor* t : layer.params()) std::fill(t->grad.begin(), t->grad.end(), 0.0);
  (void)layer.forward(input, geom);
  const Matrix dx = layer.backward(r, geom, true);

  for (Tensor* t : layer.params()) {
    const std::vector<double> analytic = t->grad;
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double saved = t->data[i];
      t->data[i] = saved + eps;
      const double up = loss();
      t->data[i] = saved - eps;
      const double down = loss();
      t->data[i] = saved;
      result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic[i], (up - down) / (2.0 * eps)));
    }
  }
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    const double saved = input.data()[i];
    input.data()[i] = saved + eps;
    const double up = loss();
    input.data()[i] = saved - eps;
    const double down = loss();
    input.data()[i] = saved;
    result.max_rel_error = std::max(result.max_rel_error, relative_error(dx.data()[i], (up - down) / (2.0 * eps)));
  }
  return result;
}

}  // namespace prefbench::nn
