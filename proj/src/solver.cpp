#include "proxdi/solver.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace proxdi {

namespace {

long step_count(double T, double h) {
  if (!(h > 0) || T < h) throw Error("integrator needs 0 < h <= T");
  double ratio = T / h;
  if (ratio > 5e8) throw Error("integrator: too many steps");
  long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    n = static_cast<long>(std::ceil(ratio - 1e-12));
  }
  return std::max<long>(n, 1);
}

// (e^{kt}-1)/k with the k -> 0 limit t.
double expm1_over(double k, double t) {
  if (std::abs(k * t) < 1e-12) return t;
  return std::expm1(k * t) / k;
}

}  // namespace

double VectorField::validate_lipschitz(
    const std::vector<std::pair<Vec, Vec>>& pairs, double tol) const {
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    double den = (x - y).norm();
    if (den < 1e-14) continue;
    worst = std::max(worst, (eval(x) - eval(y)).norm() / den);
  }
  if (worst > kappa + tol + 1e-9 * kappa) {
    throw Error("vector field '" + label + "': declared Lipschitz constant " +
                std::to_string(kappa) + " violated (observed " +
                std::to_string(worst) + ")");
  }
  return worst;
}

Vec catching_up_step(const ProxSet& set, const VectorField& f, const Vec& x,
                     double h, const Tolerances& tol) {
  if (!(h > 0)) throw Error("catching_up_step: h must be positive");
  if (!set.contains(x, tol.mem)) {
    throw Error("catching_up_step: state left the set");
  }
  Vec fx = f(x);
  require_finite(fx, "vector field value");
  double r = set.prox_constant();
  if (!std::isinf(r) && h * fx.norm() >= 0.5 * r) {
    throw StepTooLarge("catching_up_step: h*||f(x)|| >= r/2");
  }
  return set.project(x + h * fx);
}

namespace {

Vec advance(const ProxSet& set, const VectorField& f, const Vec& x, double h,
            Scheme scheme, const Tolerances& tol) {
  if (scheme == Scheme::CatchingUp) return catching_up_step(set, f, x, h, tol);
  // Semi-implicit diagnostic variant: evaluate f once more at the projected
  // predictor before the final projection.
  Vec p = catching_up_step(set, f, x, h, tol);
  Vec fp = f(p);
  double r = set.prox_constant();
  if (!std::isinf(r) && h * fp.norm() >= 0.5 * r) {
    throw StepTooLarge("semi-implicit step: h*||f(p)|| >= r/2");
  }
  return set.project(x + h * fp);
}

}  // namespace

Trajectory integrate(const ProxSet& set, const VectorField& f, const Vec& x0,
                     const IntegratorConfig& cfg) {
  if (!set.contains(x0, cfg.tol.mem)) {
    throw Error("integrate: initial point not in the set");
  }
  const long n = step_count(cfg.T, cfg.h);
  const double h = cfg.h;
  const double r = set.prox_constant();
  const bool cvx = std::isinf(r);
  const double f0n = f(x0).norm();

  Trajectory traj;
  traj.prox_r = r;
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  traj.velocities.reserve(n);
  traj.diag.reserve(n);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  double fmax = f0n;
  Vec x = x0;
  for (long k = 0; k < n; ++k) {
    Vec next;
    try {
      next = advance(set, f, x, h, cfg.scheme, cfg.tol);
    } catch (const Error& e) {
      traj.aborted_at = static_cast<std::size_t>(k);
      traj.abort_reason = e.what();
      return traj;
    }
    const double tk = k * h;
    const double tk1 = (k + 1) * h;
    Vec fx = f(x);
    double fn = fx.norm();
    fmax = std::max(fmax, fn);
    Vec v = (next - x) / h;

    StepDiagnostics d;
    d.orth_residual = std::abs(v.dot(fx - v));
    double speed_base = std::min(fn, f0n * std::exp(f.kappa * tk));
    double speed_corr = h * fn * (f.kappa + (cvx ? 0.0 : 2.0 * fn / r));
    d.speed_slack = speed_base + speed_corr +
                    cfg.tol.bound * (1.0 + speed_base) - v.norm();
    double drift_base = tk1 * f0n * std::exp(f.kappa * tk1);
    double drift_corr =
        tk1 * h * fmax * (f.kappa + (cvx ? 0.0 : 2.0 * fmax / r));
    d.drift_slack = drift_base + drift_corr +
                    cfg.tol.bound * (1.0 + drift_base) -
                    (next - x0).norm();

    traj.times.push_back(tk1);
    traj.states.push_back(next);
    traj.velocities.push_back(std::move(v));
    traj.diag.push_back(d);
    x = next;
  }
  return traj;
}

Vec right_derivative(const ProxSet& set, const VectorField& f, const Vec& x,
                     const Tolerances& tol) {
  Vec fx = f(x);
  ConeProjection cp = set.cone_project(x, fx, 1e-5, tol);
  return cp.tangent_part;
}

OrthogonalityReport check_velocity_orthogonality(const Trajectory& traj,
                                                 const VectorField& f,
                                                 double tol_orth) {
  if (traj.states.empty()) throw Error("orthogonality check: empty trajectory");
  OrthogonalityReport rep;
  for (std::size_t k = 0; k < traj.velocities.size(); ++k) {
    Vec fx = f(traj.states[k]);
    const Vec& v = traj.velocities[k];
    double rho = std::abs(v.dot(fx - v));
    rep.max_residual = std::max(rep.max_residual, rho);
    if (rho > tol_orth * (1.0 + fx.squaredNorm())) rep.flagged.push_back(k);
  }
  return rep;
}

GrowthReport check_growth_bounds(const Trajectory& traj, const VectorField& f,
                                 double tol_bound) {
  if (traj.states.empty()) throw Error("growth check: empty trajectory");
  GrowthReport rep;
  rep.min_speed_slack = std::numeric_limits<double>::infinity();
  rep.min_drift_slack = std::numeric_limits<double>::infinity();
  const double f0n = f(traj.states.front()).norm();
  const double r = traj.prox_r;
  const bool cvx = std::isinf(r);
  const Vec& x0 = traj.states.front();
  double h = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0.0;
  double fmax = f0n;

  for (std::size_t k = 0; k < traj.velocities.size(); ++k) {
    double tk = traj.times[k];
    double tk1 = traj.times[k + 1];
    double fn = f(traj.states[k]).norm();
    fmax = std::max(fmax, fn);

    double speed_base = std::min(fn, f0n * std::exp(f.kappa * tk));
    double speed_corr = h * fn * (f.kappa + (cvx ? 0.0 : 2.0 * fn / r));
    double s_slack = speed_base + speed_corr + tol_bound * (1.0 + speed_base) -
                     traj.velocities[k].norm();
    double drift_base = tk1 * f0n * std::exp(f.kappa * tk1);
    double drift_corr = tk1 * h * fmax * (f.kappa + (cvx ? 0.0 : 2.0 * fmax / r));
    double d_slack = drift_base + drift_corr + tol_bound * (1.0 + drift_base) -
                     (traj.states[k + 1] - x0).norm();

    rep.min_speed_slack = std::min(rep.min_speed_slack, s_slack);
    rep.min_drift_slack = std::min(rep.min_drift_slack, d_slack);
    if (s_slack < 0) ++rep.speed_violations;
    if (d_slack < 0) ++rep.drift_violations;
  }
  return rep;
}

ContractionReport check_contraction(const ProxSet& set, const VectorField& f,
                                    const Vec& x0, const Vec& y0,
                                    const IntegratorConfig& cfg,
                                    double rel_tol) {
  Trajectory tx = integrate(set, f, x0, cfg);
  Trajectory ty = integrate(set, f, y0, cfg);
  if (!tx.ok() || !ty.ok()) {
    throw Error("contraction check: integration aborted: " +
                (tx.ok() ? ty.abort_reason : tx.abort_reason));
  }
  const double r = set.prox_constant();
  const double fx0 = f(x0).norm();
  const double fy0 = f(y0).norm();
  const double sep0 = (x0 - y0).norm();

  ContractionReport rep;
  std::size_t n = std::min(tx.states.size(), ty.states.size());
  for (std::size_t k = 0; k < n; ++k) {
    double t = tx.times[k];
    double expo = f.kappa * t;
    if (!std::isinf(r)) expo += (fx0 + fy0) * expm1_over(f.kappa, t) / r;
    double bound = sep0 * std::exp(expo);
    double measured = (tx.states[k] - ty.states[k]).norm();
    double allowed = bound * (1.0 + rel_tol) + cfg.tol.bound;
    rep.separations.push_back(measured);
    rep.bounds.push_back(bound);
    rep.max_ratio = std::max(rep.max_ratio, measured / std::max(allowed, 1e-300));
    if (measured > allowed) ++rep.violations;
  }
  return rep;
}

SemigroupReport check_semigroup(const ProxSet& set, const VectorField& f,
                                const Vec& x0, double s, double t,
                                const IntegratorConfig& cfg) {
  auto on_lattice = [&](double u) {
    double q = u / cfg.h;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
  };
  if (!on_lattice(s) || !on_lattice(t)) {
    throw Error("semigroup check: s and t must be lattice multiples of h");
  }

  IntegratorConfig full = cfg;
  full.T = s + t;
  Trajectory direct = integrate(set, f, x0, full);

  IntegratorConfig first = cfg;
  first.T = s;
  Trajectory head = integrate(set, f, x0, first);
  IntegratorConfig second = cfg;
  second.T = t;
  Trajectory tail = integrate(set, f, head.final_state(), second);
  if (!direct.ok() || !head.ok() || !tail.ok()) {
    throw Error("semigroup check: integration aborted");
  }

  SemigroupReport rep;
  rep.discrepancy = (tail.final_state() - direct.final_state()).norm();

  // Tolerance from a global discretization error estimate (h vs h/2).
  IntegratorConfig halved = full;
  halved.h = cfg.h / 2;
  Trajectory fine = integrate(set, f, x0, halved);
  double est = 0.0;
  for (std::size_t k = 0; k < direct.states.size(); ++k) {
    std::size_t k2 = 2 * k;
    if (k2 < fine.states.size()) {
      est = std::max(est, (direct.states[k] - fine.states[k2]).norm());
    }
  }
  rep.tol = std::max(2.0 * est, 1e-12);
  return rep;
}

ConvergenceReport convergence_study(const ProxSet& set, const VectorField& f,
                                    const Vec& x0, double T,
                                    const std::vector<double>& h_list,
                                    Scheme scheme) {
  if (h_list.size() < 2) throw Error("convergence study needs >= 2 step sizes");
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (!(h_list[i] < h_list[i - 1])) {
      throw Error("convergence study: h_list must be strictly decreasing");
    }
  }

  std::vector<Trajectory> runs;
  for (double h : h_list) {
    IntegratorConfig cfg;
    cfg.h = h;
    cfg.T = T;
    cfg.scheme = scheme;
    runs.push_back(integrate(set, f, x0, cfg));
    if (!runs.back().ok()) {
      throw Error("convergence study: run aborted at h=" + std::to_string(h) +
                  ": " + runs.back().abort_reason);
    }
  }

  ConvergenceReport rep;
  rep.h_list = h_list;
  double scale = 1.0 + x0.norm();
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const Trajectory& coarse = runs[i];
    const Trajectory& fine = runs[i + 1];
    double hf = h_list[i + 1];
    double sup = 0.0;
    for (std::size_t k = 0; k < coarse.states.size(); ++k) {
      double t = coarse.times[k];
      double idx = t / hf;
      long j = std::lround(idx);
      if (std::abs(idx - static_cast<double>(j)) > 1e-7) continue;
      if (j < 0 || j >= static_cast<long>(fine.states.size())) continue;
      sup = std::max(sup, (coarse.states[k] - fine.states[j]).norm());
    }
    rep.successive_sup.push_back(sup);
  }

  bool all_floor = true;
  for (double g : rep.successive_sup) {
    if (g > 1e-13 * scale) all_floor = false;
  }
  rep.exact = all_floor;
  if (!all_floor) {
    for (std::size_t i = 0; i + 1 < rep.successive_sup.size(); ++i) {
      double num = rep.successive_sup[i];
      double den = rep.successive_sup[i + 1];
      double hr = h_list[i] / h_list[i + 1];
      if (den > 1e-15 * scale) {
        rep.orders.push_back(std::log(num / den) / std::log(hr));
      }
    }
    if (!rep.orders.empty()) {
      double sum = 0.0;
      for (double p : rep.orders) sum += p;
      rep.estimated_order = sum / static_cast<double>(rep.orders.size());
    }
  }
  return rep;
}

void Trajectory::write_csv(std::ostream& os) const {
  const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x_" << i;
  for (int i = 0; i < n; ++i) os << ",v_" << i;
  os << ",orth_residual,speed_slack,drift_slack\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < states.size(); ++k) {
    put(times[k]);
    for (int i = 0; i < n; ++i) {
      os << ",";
      put(states[k][i]);
    }
    if (k < velocities.size()) {
      for (int i = 0; i < n; ++i) {
        os << ",";
        put(velocities[k][i]);
      }
      os << ",";
      put(diag[k].orth_residual);
      os << ",";
      put(diag[k].speed_slack);
      os << ",";
      put(diag[k].drift_slack);
    } else {
      for (int i = 0; i < n + 3; ++i) os << ",";
    }
    os << "\n";
  }
}

}  // namespace proxdi
