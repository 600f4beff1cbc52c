#include "prefbench/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace prefbench::nn {

namespace {

int block_count(Eigen::Index rows, int block_rows) {
  if (block_rows <= 0) throw std::invalid_argument("kernels: block_rows must be positive");
  return static_cast<int>((rows + block_rows - 1) / block_rows);
}

Eigen::Index block_len(Eigen::Index rows, int block_rows, int b) {
  return std::min<Eigen::Index>(block_rows, rows - static_cast<Eigen::Index>(b) * block_rows);
}

}  // namespace

namespace kernels {

void matmul(const Matrix& a, const Matrix& b, Matrix& c, int block_rows) {
  matmul(a, ConstMatrixMap(b.data(), b.rows(), b.cols()), c, block_rows);
}

void matmul(const Matrix& a, ConstMatrixMap b, Matrix& c, int block_rows) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  c.resize(a.rows(), b.cols());
  const int nb = block_count(a.rows(), block_rows);
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < nb; ++blk) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(blk) * block_rows;
    const Eigen::Index len = block_len(a.rows(), block_rows, blk);
    c.middleRows(r0, len).noalias() = a.middleRows(r0, len) * b;
  }
}

void matmul_bt(const Matrix& a, ConstMatrixMap b, Matrix& c, int block_rows) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_bt: inner dimension mismatch");
  c.resize(a.rows(), b.rows());
  const int nb = block_count(a.rows(), block_rows);
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < nb; ++blk) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(blk) * block_rows;
    const Eigen::Index len = block_len(a.rows(), block_rows, blk);
    c.middleRows(r0, len).noalias() = a.middleRows(r0, len) * b.transpose();
  }
}

void accumulate_at_b(const Matrix& a, const Matrix& b, MatrixMap c, int block_rows) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw std::invalid_argument("accumulate_at_b: shape mismatch");
  }
  const int nb = block_count(a.rows(), block_rows);
  thread_local std::vector<Matrix> scratch;
  std::vector<Matrix>& partials = scratch;  // the caller's instance, shared with the team
  if (partials.size() < static_cast<std::size_t>(nb)) partials.resize(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < nb; ++blk) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(blk) * block_rows;
    const Eigen::Index len = block_len(a.rows(), block_rows, blk);
    Matrix& p = partials[static_cast<std::size_t>(blk)];
    p.resize(a.cols(), b.cols());
    p.noalias() = a.middleRows(r0, len).transpose() * b.middleRows(r0, len);
  }
  for (int blk = 0; blk < nb; ++blk) c += partials[static_cast<std::size_t>(blk)];
}

void accumulate_column_sums(const Matrix& x, double* out) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = x.data() + i * x.cols();
    for (Eigen::Index j = 0; j < x.cols(); ++j) out[j] += row[j];
  }
}

void add_row_vector(Matrix& x, const double* bias) {
  const Eigen::Index cols = x.cols();
  const auto rows = static_cast<long>(x.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    double* row = x.data() + i * cols;
    for (Eigen::Index j = 0; j < cols; ++j) row[j] += bias[j];
  }
}

void im2col_2d(const Matrix& x, int samples, const GridDims& grid, int k, Matrix& col) {
  const int nodes = grid.size();
  const auto ch = static_cast<int>(x.cols());
  if (x.rows() != static_cast<Eigen::Index>(samples) * nodes) {
    throw std::invalid_argument("im2col_2d: row count does not match the grid");
  }
  const int pad = k / 2;
  col.resize(x.rows(), static_cast<Eigen::Index>(k) * k * ch);
  const int total = samples * nodes;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < total; ++row) {
    const int s = row / nodes, node = row % nodes;
    const int r = grid.row_of(node), c = grid.col_of(node);
    double* dst = col.data() + static_cast<Eigen::Index>(row) * col.cols();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const int rr = r + ky - pad, cc = c + kx - pad;
        double* seg = dst + (ky * k + kx) * ch;
        if (grid.contains(rr, cc)) {
          const double* src = x.data() + (static_cast<Eigen::Index>(s) * nodes + grid.index(rr, cc)) * ch;
          std::copy(src, src + ch, seg);
        } else {
          std::fill(seg, seg + ch, 0.0);
        }
      }
  }
}

void col2im_2d(const Matrix& col, int samples, const GridDims& grid, int k, int channels, Matrix& dx) {
  const int nodes = grid.size();
  const int pad = k / 2;
  if (col.cols() != static_cast<Eigen::Index>(k) * k * channels) {
    throw std::invalid_argument("col2im_2d: column count mismatch");
  }
  dx.setZero(static_cast<Eigen::Index>(samples) * nodes, channels);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < samples; ++s) {
    for (int node = 0; node < nodes; ++node) {
      const int r = grid.row_of(node), c = grid.col_of(node);
      const double* src = col.data() + (static_cast<Eigen::Index>(s) * nodes + node) * col.cols();
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const int rr = r + ky - pad, cc = c + kx - pad;
          if (!grid.contains(rr, cc)) continue;
          double* dst = dx.data() + (static_cast<Eigen::Index>(s) * nodes + grid.index(rr, cc)) * channels;
          const double* seg = src + (ky * k + kx) * channels;
          for (int j = 0; j < channels; ++j) dst[j] += seg[j];
        }
    }
  }
}

void im2col_1d(const Matrix& x, int samples, int length, int k, Matrix& col) {
  const auto ch = static_cast<int>(x.cols());
  if (x.rows() != static_cast<Eigen::Index>(samples) * length) {
    throw std::invalid_argument("im2col_1d: row count does not match the sequence length");
  }
  const int pad = k / 2;
  col.resize(x.rows(), static_cast<Eigen::Index>(k) * ch);
  const int total = samples * length;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < total; ++row) {
    const int s = row / length, pos = row % length;
    double* dst = col.data() + static_cast<Eigen::Index>(row) * col.cols();
    for (int t = 0; t < k; ++t) {
      const int p = pos + t - pad;
      double* seg = dst + t * ch;
      if (p >= 0 && p < length) {
        const double* src = x.data() + (static_cast<Eigen::Index>(s) * length + p) * ch;
        std::copy(src, src + ch, seg);
      } else {
        std::fill(seg, seg + ch, 0.0);
      }
    }
  }
}

void col2im_1d(const Matrix& col, int samples, int length, int k, int channels, Matrix& dx) {
  const int pad = k / 2;
  if (col.cols() != static_cast<Eigen::Index>(k) * channels) {
    throw std::invalid_argument("col2im_1d: column count mismatch");
  }
  dx.setZero(static_cast<Eigen::Index>(samples) * length, channels);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < samples; ++s) {
    for (int pos = 0; pos < length; ++pos) {
      const double* src = col.data() + (static_cast<Eigen::Index>(s) * length + pos) * col.cols();
      for (int t = 0; t < k; ++t) {
        const int p = pos + t - pad;
        if (p < 0 || p >= length) continue;
        double* dst = dx.data() + (static_cast<Eigen::Index>(s) * length + p) * channels;
        const double* seg = src + t * channels;
        for (int j = 0; j < channels; ++j) dst[j] += seg[j];
      }
    }
  }
}

void aggregate(const Adjacency& adj, const Matrix& x, int samples, Matrix& y) {
  if (x.rows() != static_cast<Eigen::Index>(samples) * adj.nodes) {
    throw std::invalid_argument("aggregate: adjacency row count mismatch");
  }
  const Eigen::Index ch = x.cols();
  y.resize(x.rows(), ch);
  const int total = samples * adj.nodes;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < total; ++row) {
    const int s = row / adj.nodes, i = row % adj.nodes;
    double* dst = y.data() + static_cast<Eigen::Index>(row) * ch;
    std::fill(dst, dst + ch, 0.0);
    for (int e = adj.offsets[static_cast<std::size_t>(i)]; e < adj.offsets[static_cast<std::size_t>(i) + 1]; ++e) {
      const double w = adj.weights[static_cast<std::size_t>(e)];
      const double* src =
          x.data() + (static_cast<Eigen::Index>(s) * adj.nodes + adj.targets[static_cast<std::size_t>(e)]) * ch;
      for (Eigen::Index j = 0; j < ch; ++j) dst[j] += w * src[j];
    }
  }
}

void relu(const Matrix& x, Matrix& y) {
  y.resize(x.rows(), x.cols());
  const auto n = static_cast<long>(x.size());
  const double* in = x.data();
  double* out = y.data();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const Matrix& y, const Matrix& dy, Matrix& dx) {
  dx.resize(dy.rows(), dy.cols());
  const auto n = static_cast<long>(dy.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) dx.data()[i] = y.data()[i] > 0.0 ? dy.data()[i] : 0.0;
}

void sigmoid(const Matrix& x, Matrix& y) {
  y.resize(x.rows(), x.cols());
  const auto n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const double v = x.data()[i];
    // Branch on sign so exp never overflows.
    if (v >= 0.0) {
      y.data()[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      y.data()[i] = e / (1.0 + e);
    }
  }
}

void sigmoid_backward(const Matrix& y, const Matrix& dy, Matrix& dx) {
  dx.resize(dy.rows(), dy.cols());
  const auto n = static_cast<long>(dy.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const double p = y.data()[i];
    dx.data()[i] = dy.data()[i] * p * (1.0 - p);
  }
}

}  // namespace kernels

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("reference::matmul: shape mismatch");
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index p = 0; p < a.cols(); ++p) acc += a(i, p) * b(p, j);
      c(i, j) = acc;
    }
  return c;
}

Matrix conv2d(const Matrix& x, int samples, const GridDims& grid, int k, const Matrix& w,
              const std::vector<double>& bias) {
  const int nodes = grid.size(), pad = k / 2;
  const auto in_ch = x.cols(), out_ch = w.cols();
  Matrix y(x.rows(), out_ch);
  for (int s = 0; s < samples; ++s)
    for (int r = 0; r < grid.rows; ++r)
      for (int c = 0; c < grid.cols; ++c)
        for (Eigen::Index o = 0; o < out_ch; ++o) {
          double acc = bias[static_cast<std::size_t>(o)];
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int rr = r + ky - pad, cc = c + kx - pad;
              if (!grid.contains(rr, cc)) continue;
              for (Eigen::Index i = 0; i < in_ch; ++i) {
                acc += x(static_cast<Eigen::Index>(s) * nodes + grid.index(rr, cc), i) *
                       w((ky * k + kx) * in_ch + i, o);
              }
            }
          y(static_cast<Eigen::Index>(s) * nodes + grid.index(r, c), o) = acc;
        }
  return y;
}

void conv2d_backward(const Matrix& x, int samples, const GridDims& grid, int k, const Matrix& w,
                     const Matrix& dy, Matrix& dx, Matrix& dw, std::vector<double>& db) {
  const int nodes = grid.size(), pad = k / 2;
  const auto in_ch = x.cols(), out_ch = w.cols();
  dx = Matrix::Zero(x.rows(), in_ch);
  dw = Matrix::Zero(w.rows(), w.cols());
  db.assign(static_cast<std::size_t>(out_ch), 0.0);
  for (int s = 0; s < samples; ++s)
    for (int r = 0; r < grid.rows; ++r)
      for (int c = 0; c < grid.cols; ++c)
        for (Eigen::Index o = 0; o < out_ch; ++o) {
          const double g = dy(static_cast<Eigen::Index>(s) * nodes + grid.index(r, c), o);
          db[static_cast<std::size_t>(o)] += g;
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int rr = r + ky - pad, cc = c + kx - pad;
              if (!grid.contains(rr, cc)) continue;
              const Eigen::Index src = static_cast<Eigen::Index>(s) * nodes + grid.index(rr, cc);
              for (Eigen::Index i = 0; i < in_ch; ++i) {
                dw((ky * k + kx) * in_ch + i, o) += g * x(src, i);
                dx(src, i) += g * w((ky * k + kx) * in_ch + i, o);
              }
            }
        }
}

Matrix conv1d(const Matrix& x, int samples, int length, int k, const Matrix& w,
              const std::vector<double>& bias) {
  const int pad = k / 2;
  const auto in_ch = x.cols(), out_ch = w.cols();
  Matrix y(x.rows(), out_ch);
  for (int s = 0; s < samples; ++s)
    for (int pos = 0; pos < length; ++pos)
      for (Eigen::Index o = 0; o < out_ch; ++o) {
        double acc = bias[static_cast<std::size_t>(o)];
        for (int t = 0; t < k; ++t) {
          const int p = pos + t - pad;
          if (p < 0 || p >= length) continue;
          for (Eigen::Index i = 0; i < in_ch; ++i) {
            acc += x(static_cast<Eigen::Index>(s) * length + p, i) * w(t * in_ch + i, o);
          }
        }
        y(static_cast<Eigen::Index>(s) * length + pos, o) = acc;
      }
  return y;
}

Matrix aggregate(const Adjacency& adj, const Matrix& x, int samples) {
  const Matrix a = adj.dense();
  Matrix y(x.rows(), x.cols());
  for (int s = 0; s < samples; ++s) {
    y.middleRows(static_cast<Eigen::Index>(s) * adj.nodes, adj.nodes) =
        matmul(a, Matrix(x.middleRows(static_cast<Eigen::Index>(s) * adj.nodes, adj.nodes)));
  }
  return y;
}

}  // namespace reference

// ---------------------------------------------------------------------------

Adjacency Adjacency::from_edges(int nodes, std::span<const std::pair<int, int>> edges) {
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(nodes));
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= nodes || v >= nodes) throw std::out_of_range("Adjacency: edge out of range");
    if (u == v) continue;
    nbrs[static_cast<std::size_t>(u)].push_back(v);
    nbrs[static_cast<std::size_t>(v)].push_back(u);
  }
  for (int i = 0; i < nodes; ++i) {
    auto& list = nbrs[static_cast<std::size_t>(i)];
    list.push_back(i);
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  Adjacency adj;
  adj.nodes = nodes;
  adj.offsets.push_back(0);
  for (int i = 0; i < nodes; ++i) {
    const auto& list = nbrs[static_cast<std::size_t>(i)];
    const double di = static_cast<double>(list.size());
    for (int j : list) {
      const double dj = static_cast<double>(nbrs[static_cast<std::size_t>(j)].size());
      adj.targets.push_back(j);
      adj.weights.push_back(1.0 / std::sqrt(di * dj));
    }
    adj.offsets.push_back(static_cast<int>(adj.targets.size()));
  }
  return adj;
}

Adjacency Adjacency::grid8(const GridDims& dims) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < dims.size(); ++i)
    for (int j : neighbors8(dims, i))
      if (j > i) edges.emplace_back(i, j);
  return from_edges(dims.size(), edges);
}

Matrix Adjacency::dense() const {
  Matrix a = Matrix::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i)
    for (int e = offsets[static_cast<std::size_t>(i)]; e < offsets[static_cast<std::size_t>(i) + 1]; ++e)
      a(i, targets[static_cast<std::size_t>(e)]) = weights[static_cast<std::size_t>(e)];
  return a;
}

}  // namespace prefbench::nn
