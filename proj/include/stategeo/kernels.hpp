#pragma once

// Kernel evaluation, the metric a kernel induces on the embedded classical
// space (g_ik = d^2 k / dx^i dy^k at x = y), and the comparison of kernel
// norms with ordinary L2 norms.

#include <Eigen/Core>

#include "stategeo/gaussian_algebra.hpp"
#include "stategeo/kernel_spec.hpp"

namespace stategeo {

[[nodiscard]] double kernel_value(const KernelSpec& kernel, const VecD& x, const VecD& y);

enum class MetricReference { Euclidean, ScaledEuclidean };

using MetricMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct MetricReport {
  VecD point;
  MetricMatrix matrix;
  /// Max-abs entrywise distance between `matrix` and reference_factor * I.
  double deviation = 0.0;
  MetricReference reference = MetricReference::Euclidean;
  double reference_factor = 1.0;
  /// Richardson estimate of the truncation error, max |g(h) - g(2h)| / 3.
  double truncation_estimate = 0.0;
};

/// Finite-difference induced metric at x = y = `at`. The reference is
/// (1/sigma^2) I for translation kernels and 2 beta I for confined ones (the
/// alpha -> 0 limit at the origin); a factor of exactly 1 is labelled Euclidean.
[[nodiscard]] MetricReport induced_metric(const KernelSpec& kernel, const VecD& at, double step = 1e-3);

/// <phi,phi>_K / ((2 pi sigma^2)^{d/2} <phi,phi>_L2) for packet-only states
/// under a translation kernel. Tends to 1 as packet widths grow relative to sigma.
[[nodiscard]] double norm_ratio(const StateExpr& phi, const KernelSpec& kernel);

}  // namespace stategeo
