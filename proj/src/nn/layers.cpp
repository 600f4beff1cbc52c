#include "prefbench/nn/layers.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "prefbench/nn/kernels.hpp"

namespace prefbench::nn {

namespace {

constexpr std::array<const char*, 7> kTypeNames{"Dense", "Conv2D", "Conv1x1", "Conv1D",
                                                "GCN",   "ReLU",   "Sigmoid"};

void glorot_uniform(Tensor& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.data) v = rng.uniform(-limit, limit);
}

void check_width(const Matrix& x, int expected, const LayerKind& kind) {
  if (x.cols() != expected) {
    throw std::invalid_argument(kind.describe() + ": input has " + std::to_string(x.cols()) +
                                " channels, expected " + std::to_string(expected));
  }
}

void check_rows(const Matrix& x, const BatchGeometry& geom, const LayerKind& kind) {
  if (x.rows() != geom.rows()) {
    throw std::invalid_argument(kind.describe() + ": input has " + std::to_string(x.rows()) +
                                " rows, batch geometry expects " + std::to_string(geom.rows()));
  }
}

/// y = x W + b applied row-wise (Dense and 1x1 convolution).
class AffineLayer final : public Layer {
 public:
  AffineLayer(const LayerKind& kind, Rng& rng) : kind_(kind), w_({kind.in, kind.out}), b_({kind.out}) {
    glorot_uniform(w_, kind.in, kind.out, rng);
  }
  const LayerKind& kind() const override { return kind_; }

  const Matrix& forward(const Matrix& x, const BatchGeometry& geom) override {
    check_width(x, kind_.in, kind_);
    check_rows(x, geom, kind_);
    input_ = &x;
    kernels::matmul(x, std::as_const(w_).matrix(), y_, geom.nodes);
    kernels::add_row_vector(y_, b_.data.data());
    return y_;
  }

  const Matrix& backward(const Matrix& dy, const BatchGeometry& geom, bool need_input_grad) override {
    kernels::accumulate_at_b(*input_, dy, w_.grad_matrix(), geom.nodes);
    kernels::accumulate_column_sums(dy, b_.grad.data());
    if (need_input_grad) {
      kernels::matmul_bt(dy, std::as_const(w_).matrix(), dx_, geom.nodes);
    } else {
      dx_.resize(0, 0);
    }
    return dx_;
  }
  std::vector<Tensor*> params() override { return {&w_, &b_}; }

 private:
  LayerKind kind_;
  Tensor w_, b_;
  const Matrix* input_ = nullptr;
  Matrix y_, dx_;
};

/// Same-padded 3x3 (or k x k) convolution over each sample's grid.
class Conv2DLayer final : public Layer {
 public:
  Conv2DLayer(const LayerKind& kind, Rng& rng)
      : kind_(kind), w_({kind.kernel * kind.kernel * kind.in, kind.out}), b_({kind.out}) {
    const int taps = kind.kernel * kind.kernel;
    glorot_uniform(w_, kind.in * taps, kind.out * taps, rng);
  }
  const LayerKind& kind() const override { return kind_; }

  const Matrix& forward(const Matrix& x, const BatchGeometry& geom) override {
    check_width(x, kind_.in, kind_);
    check_rows(x, geom, kind_);
    if (geom.grid.size() != geom.nodes) throw std::invalid_argument("Conv2D: grid does not match nodes");
    kernels::im2col_2d(x, geom.samples, geom.grid, kind_.kernel, col_);
    kernels::matmul(col_, std::as_const(w_).matrix(), y_, geom.nodes);
    kernels::add_row_vector(y_, b_.data.data());
    return y_;
  }

  const Matrix& backward(const Matrix& dy, const BatchGeometry& geom, bool need_input_grad) override {
    kernels::accumulate_at_b(col_, dy, w_.grad_matrix(), geom.nodes);
    kernels::accumulate_column_sums(dy, b_.grad.data());
    if (need_input_grad) {
      kernels::matmul_bt(dy, std::as_const(w_).matrix(), dcol_, geom.nodes);
      kernels::col2im_2d(dcol_, geom.samples, geom.grid, kind_.kernel, kind_.in, dx_);
    } else {
      dx_.resize(0, 0);
    }
    return dx_;
  }
  std::vector<Tensor*> params() override { return {&w_, &b_}; }

 private:
  LayerKind kind_;
  Tensor w_, b_;
  Matrix col_, dcol_, y_, dx_;
};

/// Same-padded convolution along each sample's node sequence.
class Conv1DLayer final : public Layer {
 public:
  Conv1DLayer(const LayerKind& kind, Rng& rng)
      : kind_(kind), w_({kind.kernel * kind.in, kind.out}), b_({kind.out}) {
    glorot_uniform(w_, kind.in * kind.kernel, kind.out * kind.kernel, rng);
  }
  const LayerKind& kind() const override { return kind_; }

  const Matrix& forward(const Matrix& x, const BatchGeometry& geom) override {
    check_width(x, kind_.in, kind_);
    check_rows(x, geom, kind_);
    kernels::im2col_1d(x, geom.samples, geom.nodes, kind_.kernel, col_);
    kernels::matmul(col_, std::as_const(w_).matrix(), y_, geom.nodes);
    kernels::add_row_vector(y_, b_.data.data());
    return y_;
  }

  const Matrix& backward(const Matrix& dy, const BatchGeometry& geom, bool need_input_grad) override {
    kernels::accumulate_at_b(col_, dy, w_.grad_matrix(), geom.nodes);
    kernels::accumulate_column_sums(dy, b_.grad.data());
    if (need_input_grad) {
      kernels::matmul_bt(dy, std::as_const(w_).matrix(), dcol_, geom.nodes);
      kernels::col2im_1d(dcol_, geom.samples, geom.nodes, kind_.kernel, kind_.in, dx_);
    } else {
      dx_.resize(0, 0);
    }
    return dx_;
  }
  std::vector<Tensor*> params() override { return {&w_, &b_}; }

 private:
  LayerKind kind_;
  Tensor w_, b_;
  Matrix col_, dcol_, y_, dx_;
};

/// H' = A_hat H W + b with the symmetric normalized adjacency A_hat.
class GcnLayer final : public Layer {
 public:
  GcnLayer(const LayerKind& kind, Rng& rng) : kind_(kind), w_({kind.in, kind.out}), b_({kind.out}) {
    glorot_uniform(w_, kind.in, kind.out, rng);
  }
  const LayerKind& kind() const override { return kind_; }

  const Matrix& forward(const Matrix& x, const BatchGeometry& geom) override {
    check_width(x, kind_.in, kind_);
    check_rows(x, geom, kind_);
    if (geom.adjacency == nullptr || geom.adjacency->nodes != geom.nodes) {
      throw std::invalid_argument("GCN: adjacency row count does not match batch nodes");
    }
    input_ = &x;
    kernels::matmul(x, std::as_const(w_).matrix(), xw_, geom.nodes);
    kernels::aggregate(*geom.adjacency, xw_, geom.samples, y_);
    kernels::add_row_vector(y_, b_.data.data());
    return y_;
  }

  const Matrix& backward(const Matrix& dy, const BatchGeometry& geom, bool need_input_grad) override {
    // A_hat is symmetric, so A_hat^T dy = A_hat dy.
    kernels::aggregate(*geom.adjacency, dy, geom.samples, g_);
    kernels::accumulate_at_b(*input_, g_, w_.grad_matrix(), geom.nodes);
    kernels::accumulate_column_sums(dy, b_.grad.data());
    if (need_input_grad) {
      kernels::matmul_bt(g_, std::as_const(w_).matrix(), dx_, geom.nodes);
    } else {
      dx_.resize(0, 0);
    }
    return dx_;
  }
  std::vector<Tensor*> params() override { return {&w_, &b_}; }

 private:
  LayerKind kind_;
  Tensor w_, b_;
  const Matrix* input_ = nullptr;
  Matrix xw_, y_, g_, dx_;
};

class ReluLayer final : public Layer {
 public:
  const LayerKind& kind() const override { return kind_; }
  const Matrix& forward(const Matrix& x, const BatchGeometry&) override {
    kernels::relu(x, y_);
    return y_;
  }
  const Matrix& backward(const Matrix& dy, const BatchGeometry&, bool) override {
    kernels::relu_backward(y_, dy, dx_);
    return dx_;
  }

 private:
  LayerKind kind_ = LayerKind::relu();
  Matrix y_, dx_;
};

class SigmoidLayer final : public Layer {
 public:
  const LayerKind& kind() const override { return kind_; }
  const Matrix& forward(const Matrix& x, const BatchGeometry&) override {
    kernels::sigmoid(x, y_);
    return y_;
  }
  const Matrix& backward(const Matrix& dy, const BatchGeometry&, bool) override {
    kernels::sigmoid_backward(y_, dy, dx_);
    return dx_;
  }

 private:
  LayerKind kind_ = LayerKind::sigmoid();
  Matrix y_, dx_;
};

}  // namespace

std::string to_string(LayerType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

LayerType parse_layer_type(const std::string& name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (name == kTypeNames[i]) return static_cast<LayerType>(i);
  throw std::invalid_argument("unknown layer type '" + name + "'");
}

long LayerKind::param_count() const {
  const long i = in, o = out, k = kernel;
  switch (type) {
    case LayerType::Dense:
    case LayerType::Conv1x1:
    case LayerType::GCN: return i * o + o;
    case LayerType::Conv2D: return i * o * k * k + o;
    case LayerType::Conv1D: return i * o * k + o;
    case LayerType::ReLU:
    case LayerType::Sigmoid: return 0;
  }
  return 0;
}

std::string LayerKind::describe() const {
  switch (type) {
    case LayerType::Dense: return "Dense{" + std::to_string(in) + "," + std::to_string(out) + "}";
    case LayerType::Conv1x1: return "Conv1x1{" + std::to_string(in) + "," + std::to_string(out) + "}";
    case LayerType::GCN: return "GCNLayer{" + std::to_string(in) + "," + std::to_string(out) + "}";
    case LayerType::Conv2D:
      return "Conv2D{" + std::to_string(in) + "," + std::to_string(out) + ",k=" + std::to_string(kernel) + "}";
    case LayerType::Conv1D:
      return "Conv1D{" + std::to_string(in) + "," + std::to_string(out) + ",k=" + std::to_string(kernel) + "}";
    case LayerType::ReLU: return "ReLU";
    case LayerType::Sigmoid: return "Sigmoid";
  }
  return "?";
}

std::unique_ptr<Layer> make_layer(const LayerKind& kind, Rng& rng) {
  if (kind.trainable() && (kind.in < 1 || kind.out < 1)) {
    throw std::invalid_argument("make_layer: " + kind.describe() + " has non-positive width");
  }
  switch (kind.type) {
    case LayerType::Dense:
    case LayerType::Conv1x1: return std::make_unique<AffineLayer>(kind, rng);
    case LayerType::Conv2D:
      if (kind.kernel < 1 || kind.kernel % 2 == 0) throw std::invalid_argument("Conv2D: kernel must be odd");
      return std::make_unique<Conv2DLayer>(kind, rng);
    case LayerType::Conv1D:
      if (kind.kernel < 1 || kind.kernel % 2 == 0) throw std::invalid_argument("Conv1D: kernel must be odd");
      return std::make_unique<Conv1DLayer>(kind, rng);
    case LayerType::GCN: return std::make_unique<GcnLayer>(kind, rng);
    case LayerType::ReLU: return std::make_unique<ReluLayer>();
    case LayerType::Sigmoid: return std::make_unique<SigmoidLayer>();
  }
  throw std::invalid_argument("make_layer: unknown layer type");
}

}  // namespace prefbench::nn
