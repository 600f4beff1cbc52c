#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "json.hpp"
#include "prefbench/nn/layers.hpp"

namespace prefbench::nn {

/// Sequential stack of layers with owned parameters.
class Network {
 public:
  Network(std::vector<LayerKind> kinds, std::uint64_t seed);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const std::vector<LayerKind>& kinds() const { return kinds_; }
  std::size_t depth() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  long param_count() const;

  const Matrix& forward(const Matrix& x, const BatchGeometry& geom);
  /// Backpropagates dL/d(output) through every layer.
  void backward(const Matrix& d_output, const BatchGeometry& geom);
  /// Backpropagates dL/d(logits) through every layer except the final
  /// Sigmoid, which must be the last layer.
  void backward_from_logits(const Matrix& d_logits, const BatchGeometry& geom);

  void zero_grad();
  std::vector<Tensor*> params();
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  /// Smallest |input| seen by any ReLU in the last forward pass.
  double min_abs_relu_input() const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);

 private:
  void backward_range(const Matrix& grad, std::size_t end, const BatchGeometry& geom);

  std::vector<LayerKind> kinds_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<const Matrix*> inputs_;
};

}  // namespace prefbench::nn
