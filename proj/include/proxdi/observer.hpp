#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxdi/geometry.hpp"
#include "proxdi/solver.hpp"

namespace proxdi {

/// Lur'e system: xdot = A x + B u, y = D x, u in -N_S(y).
struct LureSystem {
  Mat A, B, D;
  ProxSet S;
  Vec x0;
};

/// State transformation z = R x with R = P^{1/2}; the transformed inclusion
/// runs over S' = (D R^{-1})^{-1}(S).
struct TransformedSystem {
  Mat R, Rinv;
  VectorField field;   // z -> R A R^{-1} z
  ProxSet set_prime;
  double r_prime = kInfiniteR;

  Vec backmap(const Vec& z) const { return Rinv * z; }
};

struct PassivityReport {
  double min_eig_P = 0.0;
  double coupling_residual = 0.0;  // ||P B - D^T||_max
  double max_eig_decay = 0.0;      // max eig of A^T P + P A + delta P
  bool pd_ok = false;
  bool coupling_ok = false;
  bool decay_ok = false;
  bool all() const { return pd_ok && coupling_ok && decay_ok; }
};

/// Checks P > 0, P B = D^T, and A^T P + P A <= -delta P.
PassivityReport verify_passivity(const Mat& P, const Mat& A, const Mat& B,
                                 const Mat& D, double delta,
                                 double tol_pd = 1e-10, double tol_psd = 1e-9);

/// Symmetric square root of P by eigendecomposition; throws NotPD.
Mat sqrt_pd(const Mat& P, double tol_pd = 1e-10);

TransformedSystem transform(const LureSystem& sys, const Mat& P);

/// rho = delta r sigma_min+(D R^{-1}) / (2 ||R^{-1}|| ||D R^{-1}|| ||R A R^{-1}||).
double stability_radius(const LureSystem& sys, const Mat& P, double delta);

struct LureRunReport {
  Trajectory trajectory;  // original coordinates
  double decay_factor = 0.0;  // cond(R) multiplier in the bound
  double worst_margin = 0.0;  // min_k (bound_k - ||x_k||)
  bool decay_ok = false;
};

/// Simulates via the transformed system and maps back; checks
/// ||x(t_k)|| <= ||R^{-1}|| ||R|| ||x0|| e^{-delta t_k / 2} + tol.
/// Throws RadiusViolation when ||x0|| >= stability_radius.
LureRunReport simulate_lure(const LureSystem& sys, const Mat& P,
                            const IntegratorConfig& cfg, double delta,
                            double tol = 1e-3);

/// A Lipschitz map with its declared constant.
struct LipMap {
  std::function<Vec(const Vec&)> map;
  double lip = 0.0;
  Vec operator()(const Vec& x) const { return map(x); }
};

LipMap linear_map(const Mat& M);
LipMap zero_map(int out_dim);

/// Coupled observer-plant field on R^{2n}:
/// (z, x) -> (f(z) - L(G(z)) + L(G(x)), f(x)).
VectorField build_coupled_field(const VectorField& f, const LipMap& L,
                                const LipMap& G, int n);

struct ObserverSetup {
  LipMap L, G;
  double delta = 1.0;
  double epsilon = 0.5;
  double eta = 0.0;
  std::optional<double> m;  // plant state bound; estimated when absent
  std::optional<double> M;  // field bound on B(0, m); estimated when absent
};

struct ObserverReport {
  std::vector<double> times;
  std::vector<double> errors;
  std::vector<double> bounds;
  double beta = 0.0;
  double fitted_rate = 0.0;  // least-squares slope of log e_k
  double m_used = 0.0, M_used = 0.0;
  bool bound_ok = false;
  std::vector<std::string> checks;
  Trajectory coupled;  // product-space trajectory (z block first)

  void write_csv(std::ostream& os) const;  // t, e, bound, x..., xhat...
};

/// Integrates the coupled inclusion on C x C, validates the observer-theorem
/// hypotheses online, checks e_k <= e_0 e^{-beta t_k/2}, and fits the decay
/// rate. Throws HypothesisViolation naming the first failed condition.
ObserverReport observer_run(const ProxSet& set_c, const VectorField& f,
                            const ObserverSetup& setup, const Vec& x0,
                            const Vec& z0, const IntegratorConfig& cfg,
                            double tol_obs = 1e-3);

struct GainReport {
  Mat L;
  double max_eig = 0.0;  // max eig of (A+A^T)/2 - rho G^T G + delta I
  bool pass = false;
  double eta = 0.0;      // min{ eps/(6||A||), eps/(3||L G||) }
};

/// Linear gain L = rho G^T with the spectral verdict of the final corollary.
GainReport design_linear_gain(const Mat& A, const Mat& G, double rho,
                              double delta, double epsilon);

struct ComplementarityReport {
  std::vector<Vec> multipliers;
  double max_negativity = 0.0;      // max_k max(0, -min_i lambda_i)
  double max_infeasibility = 0.0;   // max_k max(0, -min_i g_i(x_k))
  double max_product = 0.0;         // max_k |<lambda_k, g(x_k)>|
  std::optional<std::size_t> activation_step;  // first step with active face
  bool ok(double tol = 1e-5) const {
    return max_negativity <= tol && max_infeasibility <= tol &&
           max_product <= tol;
  }
};

/// Complementarity system over C = {x : H x + c >= 0}; the extractor
/// recovers multipliers from discrete velocities by least squares on
/// H^T lambda = v_k - f(x_k).
struct NdcsSystem {
  ProxSet set;
  Mat H;
  Vec c;

  ComplementarityReport extract_multipliers(const Trajectory& traj,
                                            const VectorField& f) const;
};

/// Builds the NDCS constraint set; throws QualificationFailure when H has
/// deficient row rank.
NdcsSystem ndcs_build(const Mat& H, const Vec& c);

/// Searches a symmetric positive definite P with P B = D^T and
/// A^T P + P A <= -delta P for n <= 3, over Q^T diag(p) Q parameterizations.
std::optional<Mat> search_metric(const Mat& A, const Mat& B, const Mat& D,
                                 double delta);

}  // namespace proxdi
