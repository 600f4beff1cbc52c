#include "prefbench/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace prefbench::nn {

double auto_pos_weight(std::span<const double> labels) {
  double pos = 0.0;
  for (double y : labels) pos += y;
  if (pos <= 0.0) throw std::domain_error("auto pos_weight: batch contains no positive label");
  return (static_cast<double>(labels.size()) - pos) / pos;
}

double weighted_bce(std::span<const double> pred, std::span<const double> labels, double pos_weight) {
  if (pred.size() != labels.size() || pred.empty()) {
    throw std::invalid_argument("weighted_bce: prediction and label sizes differ or are empty");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
    const double y = labels[i];
    sum += pos_weight * y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(pred.size());
}

void weighted_bce_logit_grad(std::span<const double> pred, std::span<const double> labels,
                             double pos_weight, std::span<double> out) {
  if (pred.size() != labels.size() || out.size() != pred.size() || pred.empty()) {
    throw std::invalid_argument("weighted_bce_logit_grad: size mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i], y = labels[i];
    out[i] = inv_n * (pos_weight * y * (p - 1.0) + (1.0 - y) * p);
  }
}

}  // namespace prefbench::nn
