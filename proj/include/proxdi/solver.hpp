#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxdi/geometry.hpp"

namespace proxdi {

/// Lipschitz perturbation f with its declared constant kappa.
struct VectorField {
  std::function<Vec(const Vec&)> eval;
  double kappa = 0.0;
  std::string label;

  Vec operator()(const Vec& x) const { return eval(x); }

  /// Checks ||f(x)-f(y)|| <= (kappa + tol) ||x-y|| on the supplied pairs;
  /// returns the worst ratio found.
  double validate_lipschitz(const std::vector<std::pair<Vec, Vec>>& pairs,
                            double tol = 1e-9) const;
};

enum class Scheme { CatchingUp, SemiImplicit };

struct IntegratorConfig {
  double h = 1e-3;
  double T = 1.0;
  Scheme scheme = Scheme::CatchingUp;
  Tolerances tol;
};

struct StepDiagnostics {
  double orth_residual = 0.0;  // |<v_k, f(x_k) - v_k>|
  double speed_slack = 0.0;    // discrete speed bound minus ||v_k||
  double drift_slack = 0.0;    // drift bound minus ||x_k - x_0||
};

/// Discrete solution path. states.size() == times.size(); velocities and
/// per-step diagnostics have one entry less.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> velocities;
  std::vector<StepDiagnostics> diag;
  double prox_r = kInfiniteR;  // prox constant of the generating set
  std::optional<std::size_t> aborted_at;
  std::string abort_reason;

  bool ok() const { return !aborted_at.has_value(); }
  std::size_t steps() const { return velocities.size(); }
  const Vec& final_state() const { return states.back(); }

  /// CSV export: "t, x_0..x_{n-1}, v_0..v_{n-1}, orth_residual, speed_slack,
  /// drift_slack" at 17 significant digits. The last row has no step data;
  /// those fields are left empty.
  void write_csv(std::ostream& os) const;
};

/// One catching-up step x -> Pi_C(x + h f(x)).
Vec catching_up_step(const ProxSet& set, const VectorField& f, const Vec& x,
                     double h, const Tolerances& tol = {});

/// Integrates over [0, T] on the uniform lattice t_k = k h. Step errors abort
/// the run; the partial trajectory records the position and reason.
Trajectory integrate(const ProxSet& set, const VectorField& f, const Vec& x0,
                     const IntegratorConfig& cfg);

/// Minimal norm selection (f(x) - N_C(x))° = Pi_{T_C(x)}(f(x)).
Vec right_derivative(const ProxSet& set, const VectorField& f, const Vec& x,
                     const Tolerances& tol = {});

struct OrthogonalityReport {
  double max_residual = 0.0;
  std::vector<std::size_t> flagged;  // steps with rho > tol_orth (1+||f||^2)
};

OrthogonalityReport check_velocity_orthogonality(const Trajectory& traj,
                                                 const VectorField& f,
                                                 double tol_orth = 1e-6);

struct GrowthReport {
  double min_speed_slack = 0.0;
  double min_drift_slack = 0.0;
  std::size_t speed_violations = 0;
  std::size_t drift_violations = 0;
  bool ok() const { return speed_violations == 0 && drift_violations == 0; }
};

/// Discrete analogue of the speed/drift bounds: the continuous bounds plus a
/// curvature-and-Lipschitz O(h) correction and tol_bound slack.
GrowthReport check_growth_bounds(const Trajectory& traj, const VectorField& f,
                                 double tol_bound = 1e-6);

struct ContractionReport {
  double max_ratio = 0.0;  // max over steps of measured / bound
  std::size_t violations = 0;
  std::vector<double> separations;
  std::vector<double> bounds;
  bool ok() const { return violations == 0; }
};

/// Verifies ||x_k - y_k|| against the pairwise exponential bound
/// ||x0-y0|| exp(kappa t + (||f(x0)||+||f(y0)||)(e^{kappa t}-1)/(kappa r));
/// for convex sets the exponent reduces to kappa t.
ContractionReport check_contraction(const ProxSet& set, const VectorField& f,
                                    const Vec& x0, const Vec& y0,
                                    const IntegratorConfig& cfg,
                                    double rel_tol = 1e-6);

struct SemigroupReport {
  double discrepancy = 0.0;
  double tol = 0.0;
  bool ok() const { return discrepancy <= tol; }
};

/// Restart check on the step lattice: x(t; x(s; x0)) vs x(t+s; x0).
SemigroupReport check_semigroup(const ProxSet& set, const VectorField& f,
                                const Vec& x0, double s, double t,
                                const IntegratorConfig& cfg);

struct ConvergenceReport {
  std::vector<double> h_list;
  std::vector<double> successive_sup;  // sup gap between runs i and i+1
  std::vector<double> orders;          // log2 ratios of successive gaps
  double estimated_order = 0.0;
  bool exact = false;  // all gaps at floor; scheme reproduces itself
};

ConvergenceReport convergence_study(const ProxSet& set, const VectorField& f,
                                    const Vec& x0, double T,
                                    const std::vector<double>& h_list,
                                    Scheme scheme = Scheme::CatchingUp);

}  // namespace proxdi
