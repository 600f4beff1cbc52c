#pragma once

#include "prefbench/nn/tensor.hpp"

// Two implementations of every hot loop in the network:
//
//   kernels::   OpenMP-parallel over fixed row blocks (one block per sample).
//               Reductions across blocks are summed serially in block order, so
//               results are bit-identical for every thread count.
//   reference:: plain serial loops written directly from the definitions; kept
//               for tests and the benchmark.
//
// Convolution weights are laid out as (k*k*in_ch) x out_ch for 2D and
// (k*in_ch) x out_ch for 1D, with tap-major rows: row = tap * in_ch + channel,
// tap = ky * k + kx. Padding is zero and preserves the spatial size.

namespace prefbench::nn {

namespace kernels {

/// c = a * b, computed per block of `block_rows` rows of `a`.
void matmul(const Matrix& a, const Matrix& b, Matrix& c, int block_rows);
void matmul(const Matrix& a, ConstMatrixMap b, Matrix& c, int block_rows);
/// c = a * b^T.
void matmul_bt(const Matrix& a, ConstMatrixMap b, Matrix& c, int block_rows);
/// c += sum over row blocks of a_blk^T * b_blk, blocks added in order.
void accumulate_at_b(const Matrix& a, const Matrix& b, MatrixMap c, int block_rows);
/// out[j] += sum_i x(i, j), in row order.
void accumulate_column_sums(const Matrix& x, double* out);
void add_row_vector(Matrix& x, const double* bias);

void im2col_2d(const Matrix& x, int samples, const GridDims& grid, int k, Matrix& col);
void col2im_2d(const Matrix& col, int samples, const GridDims& grid, int k, int channels, Matrix& dx);
void im2col_1d(const Matrix& x, int samples, int length, int k, Matrix& col);
void col2im_1d(const Matrix& col, int samples, int length, int k, int channels, Matrix& dx);

/// y_s = A_hat * x_s for every sample block s.
void aggregate(const Adjacency& adj, const Matrix& x, int samples, Matrix& y);

void relu(const Matrix& x, Matrix& y);
void relu_backward(const Matrix& y, const Matrix& dy, Matrix& dx);
void sigmoid(const Matrix& x, Matrix& y);
void sigmoid_backward(const Matrix& y, const Matrix& dy, Matrix& dx);

}  // namespace kernels

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b);

/// Direct 2D convolution over each sample's rows x cols grid.
Matrix conv2d(const Matrix& x, int samples, const GridDims& grid, int k, const Matrix& w,
              const std::vector<double>& bias);
/// Gradients of the direct 2D convolution: dx, dw, db.
void conv2d_backward(const Matrix& x, int samples, const GridDims& grid, int k, const Matrix& w,
                     const Matrix& dy, Matrix& dx, Matrix& dw, std::vector<double>& db);

Matrix conv1d(const Matrix& x, int samples, int length, int k, const Matrix& w,
              const std::vector<double>& bias);

/// Dense-matrix aggregation with the normalized adjacency.
Matrix aggregate(const Adjacency& adj, const Matrix& x, int samples);

}  // namespace reference

}  // namespace prefbench::nn
