#include "proxdi/monotone.hpp"

#include <algorithm>
#include <cmath>

namespace proxdi {

double choose_cap(const ProxSet& set, const VectorField& f, const Vec& x0,
                  double T) {
  if (!(T > 0)) throw Error("choose_cap: horizon must be positive");
  if (!set.contains(x0, 1e-9)) throw Error("choose_cap: x0 not in the set");
  const double fx0 = f(x0).norm();
  const double kappa = f.kappa;
  const double r = set.prox_constant();

  auto admits_window = [&](double m) {
    double s = std::isinf(r) ? 0.0 : m / r;
    double T0 = T;
    for (int i = 0; i < 200 && T0 > 1e-300; ++i, T0 *= 0.5) {
      double lhs = fx0 + kappa * (fx0 * T0 * std::exp((kappa + s) * T0) + 1.0);
      if (lhs <= m * (1.0 + 1e-12) + 1e-12) return true;
    }
    return false;
  };

  // The selection cap must dominate sup_t ||f(x(t))|| <= ||f(x0)|| e^{kappa T}.
  double candidate =
      std::max({fx0 * std::exp(kappa * T), fx0 + kappa, 1e-6});
  while (candidate <= 1e9) {
    if (admits_window(candidate)) return candidate;
    candidate *= 2.0;
  }
  throw CapSearchOverflow("choose_cap: no m <= 1e9 satisfies the window bound");
}

namespace {

// Residual ||z - x - lambda((m/r)x + n)|| minimized over the capped normal
// cone at x. Exact at solutions (where the optimal n is the cone projection).
double merit_residual(const ProxSet& set, double m, double s, double lambda,
                      const Vec& z, const Vec& x) {
  Vec w = (z - (1.0 + lambda * s) * x) / lambda;
  Vec n;
  try {
    n = set.cone_project(x, w).normal_part;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
  double nn = n.norm();
  if (nn > m) n *= m / nn;
  return lambda * (w - n).norm();
}

}  // namespace

Vec resolvent(const ShiftedOperator& op, double lambda, const Vec& z) {
  if (!(lambda > 0)) throw Error("resolvent: lambda must be positive");
  const ProxSet& C = op.set;
  const double s = op.shift();
  const double denom = 1.0 + lambda * s;

  // Closed form: x = Pi_C(z / (1 + lambda m/r)) whenever the implied normal
  // selection respects the cap.
  try {
    Vec xhat = C.project(z / denom);
    Vec n = (z - denom * xhat) / lambda;
    if (n.norm() <= op.m * (1.0 + 1e-9) + 1e-12) return xhat;
  } catch (const TubeViolation&) {
    // fall through to the search
  }

  if (C.dim() > 3) {
    throw Error("resolvent: brute-force path limited to dimension <= 3");
  }

  const int d = C.dim();
  const Vec zc = z / denom;
  const double reach =
      2.0 * lambda * (op.m + s * (zc.norm() + 1.0)) + 0.1 * (1.0 + zc.norm());

  auto merit = [&](const Vec& x) {
    return merit_residual(C, op.m, s, lambda, z, x);
  };

  // Coarse sweep: project box lattice points onto C, keep the best few.
  std::vector<std::pair<double, Vec>> pool;
  const int npts = d == 1 ? 41 : (d == 2 ? 21 : 9);
  std::vector<int> idx(d, 0);
  while (true) {
    Vec p(d);
    for (int i = 0; i < d; ++i) {
      p[i] = zc[i] - reach + 2.0 * reach * idx[i] / (npts - 1);
    }
    try {
      Vec x = C.project(p);
      pool.emplace_back(merit(x), x);
    } catch (const TubeViolation&) {
    }
    int k = 0;
    while (k < d && ++idx[k] == npts) idx[k++] = 0;
    if (k == d) break;
  }
  if (pool.empty()) throw Error("resolvent: no reachable point of C in range");
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  pool.resize(std::min<std::size_t>(pool.size(), 5));

  // Pattern-search refinement along projected coordinate moves.
  double best_res = std::numeric_limits<double>::infinity();
  Vec best_x;
  for (auto& [res0, x0] : pool) {
    Vec x = x0;
    double res = res0;
    double step = std::max(reach / npts, 1e-8);
    while (step > 1e-11) {
      bool improved = false;
      for (int i = 0; i < d; ++i) {
        for (double sgn : {1.0, -1.0}) {
          Vec p = x;
          p[i] += sgn * step;
          try {
            Vec cand = C.project(p);
            double rc = merit(cand);
            if (rc < res) {
              res = rc;
              x = cand;
              improved = true;
            }
          } catch (const TubeViolation&) {
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
  }

  if (best_res > 1e-6) {
    throw NoSolutionInGrid(
        "resolvent: residual floor " + std::to_string(best_res) +
            " exceeds 1e-6; cap m is too small to reach z",
        best_x, best_res);
  }
  return best_x;
}

Trajectory dim_integrate(const ProxSet& set, const VectorField& f,
                         const Vec& x0, const IntegratorConfig& cfg, double m) {
  if (set.dim() > 3) throw Error("dim_integrate: limited to dimension <= 3");
  if (!set.contains(x0, cfg.tol.mem)) {
    throw Error("dim_integrate: initial point not in the set");
  }
  ShiftedOperator op{set, m};
  const double s = op.shift();
  const double h = cfg.h;
  const long n = std::max<long>(1, std::lround(std::ceil(cfg.T / h - 1e-12)));
  const double r = set.prox_constant();
  const bool cvx = std::isinf(r);
  const double f0n = f(x0).norm();

  Trajectory traj;
  traj.prox_r = r;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  double fmax = f0n;
  Vec x = x0;
  for (long k = 0; k < n; ++k) {
    Vec next;
    try {
      next = resolvent(op, h, x + h * (f(x) + s * x));
      if (!set.contains(next, cfg.tol.mem)) {
        throw Error("dim_integrate: iterate left C (viability violated)");
      }
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

    StepDiagnostics dg;
    dg.orth_residual = std::abs(v.dot(fx - v));
    double speed_base = std::min(fn, f0n * std::exp(f.kappa * tk));
    double speed_corr = h * fn * (f.kappa + (cvx ? 0.0 : 2.0 * fn / r)) +
                        h * s * x.norm();
    dg.speed_slack = speed_base + speed_corr +
                     cfg.tol.bound * (1.0 + speed_base) - v.norm();
    double drift_base = tk1 * f0n * std::exp(f.kappa * tk1);
    double drift_corr =
        tk1 * h * (fmax * (f.kappa + (cvx ? 0.0 : 2.0 * fmax / r)) +
                   s * (x0.norm() + drift_base));
    dg.drift_slack = drift_base + drift_corr +
                     cfg.tol.bound * (1.0 + drift_base) - (next - x0).norm();

    traj.times.push_back(tk1);
    traj.states.push_back(next);
    traj.velocities.push_back(std::move(v));
    traj.diag.push_back(dg);
    x = next;
  }
  return traj;
}

EquivalenceReport equivalence_check(const ProxSet& set, const VectorField& f,
                                    const Vec& x0, const IntegratorConfig& cfg) {
  EquivalenceReport rep;
  rep.m = choose_cap(set, f, x0, cfg.T);
  rep.catching_up = integrate(set, f, x0, cfg);
  rep.dim = dim_integrate(set, f, x0, cfg, rep.m);
  if (!rep.catching_up.ok() || !rep.dim.ok()) {
    throw Error("equivalence check: a scheme aborted: " +
                (rep.catching_up.ok() ? rep.dim.abort_reason
                                      : rep.catching_up.abort_reason));
  }

  std::size_t n = std::min(rep.catching_up.states.size(), rep.dim.states.size());
  for (std::size_t k = 0; k < n; ++k) {
    double gap = (rep.catching_up.states[k] - rep.dim.states[k]).norm();
    rep.gap_table.emplace_back(rep.catching_up.times[k], gap);
    rep.sup_gap = std::max(rep.sup_gap, gap);
  }

  // Gap budget from each scheme's own h vs h/2 difference (order-1
  // Richardson: error ~ 2x the self-difference).
  IntegratorConfig fine = cfg;
  fine.h = cfg.h / 2;
  Trajectory cu2 = integrate(set, f, x0, fine);
  Trajectory di2 = dim_integrate(set, f, x0, fine, rep.m);
  double d_cu = 0.0, d_di = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t k2 = 2 * k;
    if (k2 < cu2.states.size()) {
      d_cu = std::max(d_cu, (rep.catching_up.states[k] - cu2.states[k2]).norm());
    }
    if (k2 < di2.states.size()) {
      d_di = std::max(d_di, (rep.dim.states[k] - di2.states[k2]).norm());
    }
  }
  double budget = 3.0 * (d_cu + d_di) + 1e-12 * (1.0 + x0.norm());
  rep.c_eq = budget / cfg.h;
  rep.within = rep.sup_gap <= budget;
  return rep;
}

}  // namespace proxdi
