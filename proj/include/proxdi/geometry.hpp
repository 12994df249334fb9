#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "proxdi/errors.hpp"

namespace proxdi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInfiniteR = std::numeric_limits<double>::infinity();

/// Shared numeric tolerances. Defaults follow the library-wide contract:
/// membership at 1e-9, cone orthogonality at 1e-6, bound slack at 1e-6
/// absolute plus 1e-6 relative, boundary classification at 1e-7.
struct Tolerances {
  double mem = 1e-9;
  double orth = 1e-6;
  double bound = 1e-6;
  double boundary = 1e-7;
};

/// Throws DimensionMismatch / Error unless every entry of x is finite.
void require_finite(const Vec& x, const std::string& what);

enum class SetKind {
  Ball,
  Box,
  Orthant,
  SphereShell,
  BallComplement,
  LinearPreimage,
  Product,
  LevelSetPolyhedral,
};

std::string to_string(SetKind k);

/// Moreau decomposition of a vector at a point of the set: v splits into a
/// proximal-normal part and a tangent-cone part, orthogonal to each other.
struct ConeProjection {
  Vec normal_part;
  Vec tangent_part;
  double residual = 0.0;  // |<normal_part, tangent_part>|
};

struct HypoSample {
  Vec x1, x2, xi1, xi2;
  double lhs = 0.0;    // <x1-x2, xi1-xi2>
  double bound = 0.0;  // -(m/r)*||x1-x2||^2
};

/// Report of a sampled hypomonotonicity check of the capped normal cone.
struct HypoReport {
  std::vector<HypoSample> violations;
  double worst_slack = std::numeric_limits<double>::infinity();  // min(lhs - bound)
  int checked = 0;
  bool ok() const { return violations.empty(); }
};

/// A closed uniformly prox-regular subset of R^n behind a projection oracle.
/// Immutable and cheap to copy; all operations are pure.
class ProxSet {
 public:
  static ProxSet ball(Vec center, double radius);
  static ProxSet box(Vec lower, Vec upper);
  static ProxSet orthant(int m);
  /// Annulus r_in <= ||x - center|| <= r_out. r_in == r_out gives the sphere
  /// itself (reach r_in in both cases).
  static ProxSet sphere_shell(Vec center, double r_in, double r_out);
  /// Complement of the open ball: ||x - center|| >= radius.
  static ProxSet ball_complement(Vec center, double radius);
  /// Preimage {x : D x in inner}; requires inner contained in range(D).
  static ProxSet linear_preimage(Mat D, ProxSet inner);
  static ProxSet product(ProxSet left, ProxSet right);
  /// Polyhedron {x : H x + c >= 0 componentwise}; H must have full row rank
  /// for the NDCS qualification but the set itself accepts any H != 0.
  static ProxSet polyhedral(Mat H, Vec c);

  SetKind kind() const;
  int dim() const;
  bool convex() const;

  /// Uniform prox-regularity constant r (+inf for convex kinds). For
  /// LinearPreimage this evaluates r_inner * sigma_min+ / sigma_max^2 of D.
  double prox_constant() const;

  /// Exact membership predicate, optionally dilated by `band`. Never
  /// projects; safe for use as an independent oracle primitive.
  bool member(const Vec& x, double band = 0.0) const;

  /// Nearest point of the set. Unique inside the tube d_C(x) < r; throws
  /// TubeViolation outside it for nonconvex kinds.
  Vec project(const Vec& x) const;

  double distance(const Vec& x) const;

  bool contains(const Vec& x, double tol_mem = 1e-9) const;

  /// Splits v at x in C into Pi_{N_C(x)}(v) and Pi_{T_C(x)}(v). Closed form
  /// per kind where the boundary structure permits, otherwise a directional
  /// finite difference of the projection with one Richardson halving.
  ConeProjection cone_project(const Vec& x, const Vec& v, double h_fd = 1e-5,
                              const Tolerances& tol = {}) const;

  /// Axis-aligned bounding box; half-width capped at `unbounded_extent` for
  /// unbounded kinds (orthant, ball complement, polyhedra).
  std::pair<Vec, Vec> bounding_box(double unbounded_extent = 4.0) const;

  /// Writes the structured-text scenario block for this set.
  void write_block(std::ostream& os, int indent = 0) const;

  // Kind-specific accessors (throw Error on kind mismatch).
  const Vec& center() const;
  double radius() const;
  const Vec& lower() const;
  const Vec& upper() const;
  double inner_radius() const;
  double outer_radius() const;
  const Mat& map() const;      // LinearPreimage D / LevelSetPolyhedral H
  const Vec& offset() const;   // LevelSetPolyhedral c
  const ProxSet& inner() const;
  const ProxSet& left() const;
  const ProxSet& right() const;

 private:
  struct Impl;
  explicit ProxSet(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// Checks the hypomonotonicity inequality of the capped normal cone map
/// N_C(.) cap B(0,m) on the supplied point pairs. Normals are built by
/// cone-projecting the paired directions; pairs whose normal cone is trivial
/// contribute xi = 0. Violations are data, not errors.
HypoReport hypomonotonicity_check(
    const ProxSet& set,
    const std::vector<std::pair<Vec, Vec>>& sample_points,
    const std::vector<std::pair<Vec, Vec>>& directions, double m,
    double tol = 1e-9);

}  // namespace proxdi
