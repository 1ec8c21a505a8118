#include "stategeo/kernels.hpp"

#include <cmath>
#include <numbers>

#include "stategeo/oracle.hpp"

namespace stategeo {

namespace {

using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

// The metric entries are O(1) differences of kernel values that agree to
// O(h^2); in double precision the rounding of those values is comparable to
// the truncation error at h = 1e-3.
long double kernel_value_extended(const KernelSpec& kernel, const VecL& x, const VecL& y) {
  const long double r2 = (x - y).squaredNorm();
  if (kernel.is_translation()) {
    const long double s = kernel.as_translation().sigma;
    return std::exp(-r2 / (2 * s * s));
  }
  const auto& k = kernel.as_confined();
  const long double alpha = k.alpha;
  const long double beta = k.beta;
  return std::exp(-alpha * x.squaredNorm() - beta * r2 - alpha * y.squaredNorm());
}

}  // namespace

double kernel_value(const KernelSpec& kernel, const VecD& x, const VecD& y) {
  if (x.size() != y.size()) throw DomainError("kernel_value: dimensions differ");
  const double r2 = (x - y).squaredNorm();
  if (kernel.is_translation()) {
    const double s = kernel.as_translation().sigma;
    return std::exp(-r2 / (2.0 * s * s));
  }
  const auto& k = kernel.as_confined();
  return std::exp(-k.alpha * x.squaredNorm() - k.beta * r2 - k.alpha * y.squaredNorm());
}

MetricReport induced_metric(const KernelSpec& kernel, const VecD& at, double step) {
  if (!(step > 0.0)) throw DomainError("induced_metric: step must be positive");
  const int d = static_cast<int>(at.size());
  const auto k = [&kernel](const VecL& x, const VecL& y) { return kernel_value_extended(kernel, x, y); };
  const VecL at_l = at.cast<long double>();

  MetricReport report;
  report.point = at;
  const auto differences = [&](long double h) {
    MetricMatrix m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = oracle::finite_difference(k, at_l, at_l, i, j, h);
    }
    // Mixed partials commute; average away the rounding asymmetry.
    return MetricMatrix(0.5 * (m + m.transpose()));
  };
  report.matrix = differences(step);
  report.truncation_estimate = (report.matrix - differences(2 * static_cast<long double>(step))).cwiseAbs().maxCoeff() / 3.0;

  if (kernel.is_translation()) {
    const double s = kernel.as_translation().sigma;
    report.reference_factor = 1.0 / (s * s);
  } else {
    report.reference_factor = 2.0 * kernel.as_confined().beta;
  }
  report.reference =
      report.reference_factor == 1.0 ? MetricReference::Euclidean : MetricReference::ScaledEuclidean;
  report.deviation =
      (report.matrix - report.reference_factor * MetricMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  return report;
}

double norm_ratio(const StateExpr& phi, const KernelSpec& kernel) {
  if (!kernel.is_translation()) throw DomainError("norm_ratio requires a translation kernel");
  for (const auto& t : phi.terms()) {
    if (!is_packet(t.factors[0])) throw DomainError("norm_ratio is only defined for packets, got " + describe(t.factors[0]));
  }
  const double sigma = kernel.as_translation().sigma;
  const double kernel_mass = std::pow(2.0 * std::numbers::pi * sigma * sigma, 0.5 * phi.dim());
  const double h_norm = norm_squared(phi, kernel);
  const double l2_norm = l2_inner_product(phi, phi).real();
  if (!(l2_norm > 0.0)) throw DomainError("norm_ratio: zero state");
  return h_norm / (kernel_mass * l2_norm);
}

}  // namespace stategeo
