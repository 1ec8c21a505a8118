#pragma once

// Classical spaces inside the state space: positions as deltas, momenta as
// plane waves, and their tensor squares for a pair of particles. Includes
// projection of a state onto the nearest classical point and sampled
// certificates that the position and momentum manifolds do not meet.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stategeo/sphere_geometry.hpp"

namespace stategeo {

/// M3: position deltas. M3Tilde: plane waves. M6 / M6Tilde: their pair products.
enum class ManifoldId { M3, M3Tilde, M6, M6Tilde };

[[nodiscard]] std::string to_string(ManifoldId id);
[[nodiscard]] ManifoldId parse_manifold(const std::string& text);
/// 1 for M3 / M3Tilde, 2 for M6 / M6Tilde.
[[nodiscard]] int manifold_arity(ManifoldId id);

[[nodiscard]] StateExpr embed_position(const VecD& u);
[[nodiscard]] StateExpr embed_momentum(const VecD& p);
[[nodiscard]] PairStateExpr embed_pair_position(const VecD& u, const VecD& v);
[[nodiscard]] PairStateExpr embed_pair_momentum(const VecD& p, const VecD& q);

/// Smallest eigenvalue of the Gram matrix of the deltas at `points`.
/// Throws DomainError on duplicate points or an empty list.
[[nodiscard]] double gram_min_eigenvalue(std::span<const VecD> points, const KernelSpec& kernel);

/// Axis-aligned parameter box. Parameters are the d coordinates of the point
/// (or momentum) for M3 / M3Tilde, and the 2d coordinates (u, v) for M6 / M6Tilde.
struct SearchBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

enum class ProjectionMode { RealPart, Modulus };

struct ProjectionOptions {
  /// Coarse grid points per parameter axis (>= 2).
  int coarse_points = 41;
  ProjectionMode mode = ProjectionMode::RealPart;
  double parameter_tolerance = 1e-8;
  /// Coarse cells within this distance of the best value count as tied.
  double tie_tolerance = 1e-9;
  int max_cycles = 200;
};

struct ProjectionResult {
  Eigen::VectorXd point;
  /// Re or |.| of the overlap with the normalized manifold state, in [0, 1] when nonnegative.
  double overlap = 0.0;
  double residual_angle = 0.0;
  int iterations = 0;
  /// Set when two non-adjacent coarse cells reach the maximum within tie_tolerance.
  bool tie = false;
};

/// Maximizes the overlap of psi with the normalized manifold state over the
/// box: a coarse grid scan, then coordinate-wise golden-section search with a
/// Newton polish around each tied coarse maximum. Remaining ties resolve to
/// the lexicographically smallest parameter. Throws DomainError on an empty
/// box or a manifold of the wrong arity.
[[nodiscard]] ProjectionResult nearest_classical_point(const Sphere1& psi, ManifoldId manifold, const SearchBox& box,
                                                       const ProjectionOptions& opts = {});
[[nodiscard]] ProjectionResult nearest_classical_point(const Sphere2& psi, ManifoldId manifold, const SearchBox& box,
                                                       const ProjectionOptions& opts = {});

/// Uniform sample of a manifold's parameters: `count` points per axis on [-half_range, half_range].
struct SampleGrid {
  double half_range = 5.0;
  int count = 41;
};

struct SeparationResult {
  /// Smallest Fubini-Study angle between the reference state and any sample.
  double min_angle = 0.0;
  /// 1 - (largest normalized overlap modulus); positive certifies separation on the sample.
  double epsilon = 0.0;
  Eigen::VectorXd closest;
  std::size_t samples = 0;
};

/// Angle between the state at parameter p on manifold `a` and a grid sample
/// of manifold `b`. When a == b the reference parameter itself is included,
/// so the result is 0. Plane-wave manifolds need a confined kernel; under a
/// translation kernel the overlap diverges and DivergenceError propagates.
[[nodiscard]] SeparationResult manifold_separation(const Eigen::VectorXd& p, ManifoldId a, ManifoldId b,
                                                   const KernelSpec& kernel, const SampleGrid& grid = {});

}  // namespace stategeo
