#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#ifndef EIGEN_DONT_PARALLELIZE
#define EIGEN_DONT_PARALLELIZE
#endif
#include <Eigen/Dense>

#include "prefbench/layout.hpp"

namespace prefbench::nn {

/// Activations of a stacked batch: one row per (sample, node), one column per
/// channel.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Trainable parameter: shape-tagged values and their accumulated gradient.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    const auto n = static_cast<std::size_t>(
        std::accumulate(shape.begin(), shape.end(), 1L, std::multiplies<long>()));
    data.assign(n, 0.0);
    grad.assign(n, 0.0);
  }

  std::size_t size() const { return data.size(); }
  int rows() const { return shape.front(); }
  int cols() const { return static_cast<int>(data.size()) / shape.front(); }

  MatrixMap matrix() { return MatrixMap(data.data(), rows(), cols()); }
  ConstMatrixMap matrix() const { return ConstMatrixMap(data.data(), rows(), cols()); }
  MatrixMap grad_matrix() { return MatrixMap(grad.data(), rows(), cols()); }
};

/// Symmetrically normalized adjacency with self-loops, D^-1/2 (A + I) D^-1/2,
/// stored as CSR rows (each row includes its own diagonal entry).
struct Adjacency {
  int nodes = 0;
  std::vector<int> offsets;  // nodes + 1
  std::vector<int> targets;
  std::vector<double> weights;

  /// Undirected edge list without self-loops; duplicates are ignored.
  static Adjacency from_edges(int nodes, std::span<const std::pair<int, int>> edges);
  /// 8-neighbor grid graph.
  static Adjacency grid8(const GridDims& dims);

  /// Dense copy of the normalized matrix (tests and reference kernels).
  Matrix dense() const;
};

/// Shape of a stacked batch: `samples` blocks of `nodes` rows. Grid layers use
/// `grid` (nodes == grid.size()); GCN layers use `adjacency`.
struct BatchGeometry {
  int samples = 1;
  int nodes = 1;
  GridDims grid{1, 1, 1.0};
  const Adjacency* adjacency = nullptr;

  int rows() const { return samples * nodes; }
};

}  // namespace prefbench::nn
