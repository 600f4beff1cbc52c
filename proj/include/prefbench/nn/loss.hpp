#pragma once

#include <span>
#include <stdexcept>

namespace prefbench::nn {

inline constexpr double kBceClamp = 1e-7;

/// (N - P) / P over the given labels; throws std::domain_error when P == 0.
double auto_pos_weight(std::span<const double> labels);

/// L = -(1/N) sum [w y log p + (1 - y) log(1 - p)], with p clamped to
/// [eps, 1 - eps].
double weighted_bce(std::span<const double> pred, std::span<const double> labels, double pos_weight);

/// dL/dz for p = sigmoid(z): (1/N) [w y (p - 1) + (1 - y) p]. Exact for the
/// unclamped loss.
void weighted_bce_logit_grad(std::span<const double> pred, std::span<const double> labels,
                             double pos_weight, std::span<double> out);

}  // namespace prefbench::nn
