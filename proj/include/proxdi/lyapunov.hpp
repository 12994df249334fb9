#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxdi/geometry.hpp"
#include "proxdi/sampling.hpp"
#include "proxdi/solver.hpp"

namespace proxdi {

/// Candidate pair (V, W) with decay rate a. V is smooth with gradient access;
/// plus_indicator marks the nonsmooth form V + I_C whose proximal
/// subdifferential is grad V + N_C. The optional domain restricts dom V; the
/// contract dom V ⊆ C is enforced before certification.
struct LyapunovCandidate {
  std::function<double(const Vec&)> V;
  std::function<Vec(const Vec&)> gradV;
  std::function<double(const Vec&)> W;
  double a = 0.0;
  std::optional<ProxSet> domain;
  bool plus_indicator = false;
  std::string label;
};

enum class Verdict { Certified, Violated, Inconclusive };

std::string to_string(Verdict v);

struct CertificateReport {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<Vec> samples;
  std::vector<double> margins;
  double worst_margin = 0.0;
  std::optional<Vec> witness;  // always set when Violated
  std::string criterion;

  /// CSV of (sample point, margin).
  void write_csv(std::ostream& os) const;
};

/// Margin of the pointwise criterion
///   <grad V(x), (f(x) - N_C(x))°> + a V(x) + W(x)
/// at a single point; <= 0 certifies the point. Throws DomainViolation when
/// x is outside C or outside dom V, or when the candidate's declared domain
/// has sampled points outside C (the domain contract is not removable).
double pointwise_certificate(const ProxSet& set, const VectorField& f,
                             const LyapunovCandidate& cand, const Vec& x,
                             const Tolerances& tol = {});

/// Strict-margin sampled certification. Certified iff every margin is <=
/// -band; Violated (with worst witness) iff some margin > +band;
/// Inconclusive otherwise. band = 1e-6 by default.
CertificateReport certify_on_samples(const ProxSet& set, const VectorField& f,
                                     const LyapunovCandidate& cand,
                                     const SamplerSpec& sampler,
                                     double band = 1e-6);

struct DecayReport {
  std::vector<double> values;  // D_k = e^{a t_k} V(x_k) + sum_{j<k} h W(x_j)
  double max_excess = 0.0;     // max_k (D_k - D_0)
  double max_rise = 0.0;       // max consecutive increase
  bool ok = false;
};

/// Checks monotone nonincrease of the discrete Lyapunov functional along a
/// trajectory, to tol_dec. Left-rectangle quadrature by default.
DecayReport trajectory_decay_check(const Trajectory& traj,
                                   const LyapunovCandidate& cand,
                                   double tol_dec = 1e-4,
                                   bool trapezoid = false);

/// Invariance certificate for a closed subset S of C: at sampled x in S the
/// minimal-norm selection must lie in T_S(x); a dual vote checks sampled
/// proximal normals of S against the selection. Throws SubsetViolation when
/// a sample of S is outside C.
CertificateReport invariance_certificate(const ProxSet& set_c,
                                         const ProxSet& subset_s,
                                         const VectorField& f,
                                         const SamplerSpec& sampler,
                                         double tol_cert = 1e-6);

struct RadiusReport {
  bool condition_holds = false;
  std::optional<Vec> condition_witness;
  double radius = 0.0;  // min{ r delta / L, epsilon }
  bool decay_ok = false;
  double worst_margin = 0.0;  // min over checks of bound - ||x(t_k)||
  int starts_checked = 0;
};

/// Verifies <x, f(x)> + delta ||x||^2 <= 0 on C ∩ B(0, epsilon) samples, then
/// integrates from starts inside the attraction ball of radius
/// min{r delta / L, epsilon} and confirms ||x(t_k)|| <= ||x0|| e^{-delta t/2}.
/// Throws ConditionFailed with a witness when the pointwise condition fails.
RadiusReport lyapunov_radius_check(const ProxSet& set, const VectorField& f,
                                   double delta, double epsilon, double L,
                                   const SamplerSpec& sampler,
                                   const IntegratorConfig& cfg,
                                   int n_starts = 10, double tol = 1e-3);

}  // namespace proxdi
