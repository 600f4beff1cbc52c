#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prefbench/nn/tensor.hpp"
#include "prefbench/rng.hpp"

namespace prefbench::nn {

enum class LayerType : std::uint8_t { Dense, Conv2D, Conv1x1, Conv1D, GCN, ReLU, Sigmoid };

std::string to_string(LayerType t);
LayerType parse_layer_type(const std::string& name);

/// Layer descriptor. `kernel` is used by Conv2D (k x k) and Conv1D (k).
struct LayerKind {
  LayerType type = LayerType::ReLU;
  int in = 0;
  int out = 0;
  int kernel = 0;

  static LayerKind dense(int in, int out) { return {LayerType::Dense, in, out, 0}; }
  static LayerKind conv2d(int in, int out, int k = 3) { return {LayerType::Conv2D, in, out, k}; }
  static LayerKind conv1x1(int in, int out) { return {LayerType::Conv1x1, in, out, 1}; }
  static LayerKind conv1d(int in, int out, int k = 3) { return {LayerType::Conv1D, in, out, k}; }
  static LayerKind gcn(int in, int out) { return {LayerType::GCN, in, out, 0}; }
  static LayerKind relu() { return {LayerType::ReLU, 0, 0, 0}; }
  static LayerKind sigmoid() { return {LayerType::Sigmoid, 0, 0, 0}; }

  bool trainable() const { return type != LayerType::ReLU && type != LayerType::Sigmoid; }
  /// Dense/Conv1x1/GCN: in*out+out; Conv2D: in*out*k^2+out; Conv1D: in*out*k+out.
  long param_count() const;
  std::string describe() const;
  bool operator==(const LayerKind&) const = default;
};

/// One differentiable layer operating on stacked batches.
///
/// forward() and backward() return references to buffers owned by the layer;
/// they stay valid until the next call. The input passed to forward() must
/// stay alive until the matching backward().
class Layer {
 public:
  virtual ~Layer() = default;

  virtual const LayerKind& kind() const = 0;
  virtual const Matrix& forward(const Matrix& x, const BatchGeometry& geom) = 0;
  /// Accumulates parameter gradients and returns dL/dx (left empty when
  /// `need_input_grad` is false).
  virtual const Matrix& backward(const Matrix& dy, const BatchGeometry& geom, bool need_input_grad) = 0;
  virtual std::vector<Tensor*> params() { return {}; }
};

/// Builds a layer with Glorot-uniform weights and zero biases drawn from `rng`.
std::unique_ptr<Layer> make_layer(const LayerKind& kind, Rng& rng);

}  // namespace prefbench::nn
