#include "proxdi/observer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>

#include "proxdi/sampling.hpp"

namespace proxdi {

namespace {

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()[0];
}

double least_positive_singular(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M.transpose() * M);
  const Vec evs = es.eigenvalues();
  double max_ev = evs.maxCoeff();
  if (!(max_ev > 0) || max_ev < 1e-28) {
    throw SingularMap("matrix is (numerically) zero");
  }
  double min_pos = max_ev;
  for (int i = 0; i < evs.size(); ++i) {
    if (evs[i] > 1e-14 * max_ev) min_pos = std::min(min_pos, evs[i]);
  }
  return std::sqrt(min_pos);
}

void require_symmetric(const Mat& P, const char* what) {
  if ((P - P.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
    throw Error(std::string(what) + ": matrix must be symmetric");
  }
}

}  // namespace

PassivityReport verify_passivity(const Mat& P, const Mat& A, const Mat& B,
                                 const Mat& D, double delta, double tol_pd,
                                 double tol_psd) {
  require_symmetric(P, "verify_passivity");
  if (!(delta > 0)) throw Error("verify_passivity: delta must be positive");

  PassivityReport rep;
  Eigen::SelfAdjointEigenSolver<Mat> es_p(P);
  rep.min_eig_P = es_p.eigenvalues().minCoeff();
  rep.pd_ok = rep.min_eig_P >= tol_pd;

  rep.coupling_residual = (P * B - D.transpose()).cwiseAbs().maxCoeff();
  rep.coupling_ok = rep.coupling_residual <= 1e-10;

  Mat lyap = A.transpose() * P + P * A + delta * P;
  Eigen::SelfAdjointEigenSolver<Mat> es_l(0.5 * (lyap + lyap.transpose()));
  rep.max_eig_decay = es_l.eigenvalues().maxCoeff();
  rep.decay_ok = rep.max_eig_decay <= tol_psd;
  return rep;
}

Mat sqrt_pd(const Mat& P, double tol_pd) {
  require_symmetric(P, "sqrt_pd");
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  if (es.eigenvalues().minCoeff() < tol_pd) {
    throw NotPD("matrix is not positive definite (min eigenvalue " +
                std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

TransformedSystem transform(const LureSystem& sys, const Mat& P) {
  Mat R = sqrt_pd(P);
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  Mat Rinv = es.eigenvectors() *
             es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
             es.eigenvectors().transpose();
  if ((Rinv * R - Mat::Identity(R.rows(), R.cols())).cwiseAbs().maxCoeff() >
      1e-10) {
    throw Error("transform: square-root round trip failed (P ill-conditioned)");
  }

  // Hypothesis of the preimage lemma: S must live in the range of D.
  Mat Dpinv = sys.D.completeOrthogonalDecomposition().pseudoInverse();
  for (const Vec& s : sample_boundary(sys.S, 16, 7)) {
    double resid = (s - sys.D * (Dpinv * s)).norm();
    if (resid > 1e-8 * (1.0 + s.norm())) {
      throw Error("transform: S is not contained in range(D)");
    }
  }

  Mat Athis = R * sys.A * Rinv;
  TransformedSystem ts{
      R, Rinv,
      VectorField{[Athis](const Vec& z) { return Vec(Athis * z); },
                  spectral_norm(Athis), "transformed drift"},
      ProxSet::linear_preimage(sys.D * Rinv, sys.S), kInfiniteR};
  ts.r_prime = ts.set_prime.prox_constant();
  return ts;
}

double stability_radius(const LureSystem& sys, const Mat& P, double delta) {
  Mat R = sqrt_pd(P);
  Eigen::SelfAdjointEigenSolver<Mat> es(P);
  Mat Rinv = es.eigenvectors() *
             es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
             es.eigenvectors().transpose();
  Mat DRinv = sys.D * Rinv;
  double r = sys.S.prox_constant();
  if (std::isinf(r)) return kInfiniteR;
  double sig_plus = least_positive_singular(DRinv);
  double denom =
      2.0 * spectral_norm(Rinv) * spectral_norm(DRinv) * spectral_norm(R * sys.A * Rinv);
  if (denom <= 0) throw SingularMap("stability_radius: degenerate norms");
  return delta * r * sig_plus / denom;
}

LureRunReport simulate_lure(const LureSystem& sys, const Mat& P,
                            const IntegratorConfig& cfg, double delta,
                            double tol) {
  TransformedSystem ts = transform(sys, P);
  double rho = stability_radius(sys, P, delta);
  if (sys.x0.norm() >= rho) {
    throw RadiusViolation("simulate_lure: ||x0|| >= attraction radius");
  }
  if (!sys.S.contains(sys.D * sys.x0, 1e-9)) {
    throw Error("simulate_lure: D x0 not in S");
  }

  Vec z0 = ts.R * sys.x0;
  Trajectory zt = integrate(ts.set_prime, ts.field, z0, cfg);

  LureRunReport rep;
  rep.trajectory = zt;
  for (std::size_t k = 0; k < zt.states.size(); ++k) {
    rep.trajectory.states[k] = ts.backmap(zt.states[k]);
  }
  double h = cfg.h;
  for (std::size_t k = 0; k < rep.trajectory.velocities.size(); ++k) {
    rep.trajectory.velocities[k] =
        (rep.trajectory.states[k + 1] - rep.trajectory.states[k]) / h;
  }

  rep.decay_factor = spectral_norm(ts.Rinv) * spectral_norm(ts.R);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  double xn0 = sys.x0.norm();
  for (std::size_t k = 0; k < rep.trajectory.states.size(); ++k) {
    double bound = rep.decay_factor * xn0 *
                       std::exp(-0.5 * delta * rep.trajectory.times[k]) +
                   tol;
    rep.worst_margin =
        std::min(rep.worst_margin, bound - rep.trajectory.states[k].norm());
  }
  rep.decay_ok = zt.ok() && rep.worst_margin >= 0.0;
  return rep;
}

LipMap linear_map(const Mat& M) {
  return LipMap{[M](const Vec& x) { return Vec(M * x); }, spectral_norm(M)};
}

LipMap zero_map(int out_dim) {
  return LipMap{[out_dim](const Vec&) { return Vec(Vec::Zero(out_dim)); }, 0.0};
}

VectorField build_coupled_field(const VectorField& f, const LipMap& L,
                                const LipMap& G, int n) {
  auto eval = [f, L, G, n](const Vec& y) {
    if (y.size() != 2 * n) throw DimensionMismatch("coupled field state");
    Vec z = y.head(n);
    Vec x = y.tail(n);
    Vec out(2 * n);
    out.head(n) = f(z) - L(G(z)) + L(G(x));
    out.tail(n) = f(x);
    return out;
  };
  return VectorField{eval, f.kappa + 2.0 * L.lip * G.lip, "coupled observer"};
}

void ObserverReport::write_csv(std::ostream& os) const {
  const int n = coupled.states.empty()
                    ? 0
                    : static_cast<int>(coupled.states.front().size()) / 2;
  os << "t,e,bound";
  for (int i = 0; i < n; ++i) os << ",x_" << i;
  for (int i = 0; i < n; ++i) os << ",xhat_" << i;
  os << "\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < times.size(); ++k) {
    put(times[k]);
    os << ",";
    put(errors[k]);
    os << ",";
    put(bounds[k]);
    for (int i = 0; i < n; ++i) {
      os << ",";
      put(coupled.states[k][n + i]);  // plant block
    }
    for (int i = 0; i < n; ++i) {
      os << ",";
      put(coupled.states[k][i]);  // observer block
    }
    os << "\n";
  }
}

ObserverReport observer_run(const ProxSet& set_c, const VectorField& f,
                            const ObserverSetup& setup, const Vec& x0,
                            const Vec& z0, const IntegratorConfig& cfg,
                            double tol_obs) {
  const int n = set_c.dim();
  if (x0.size() != n || z0.size() != n) {
    throw DimensionMismatch("observer_run: state dimensions");
  }
  ObserverReport rep;

  // Guard: z0 within eta of x0, both feasible.
  double e0 = (z0 - x0).norm();
  if (e0 > setup.eta + 1e-12) {
    throw HypothesisViolation("observer_run: ||z0 - x0|| exceeds eta");
  }
  if (!set_c.contains(x0, 1e-9) || !set_c.contains(z0, 1e-9)) {
    throw HypothesisViolation("observer_run: initial points must lie in C");
  }
  if (f.kappa > 0 && setup.eta > setup.epsilon / (6.0 * f.kappa) + 1e-12) {
    throw HypothesisViolation("observer_run: eta must satisfy eta <= epsilon/(6 kappa)");
  }
  rep.checks.push_back("eta guard: ok");

  // Plant bound m from a preliminary plant-only run plus a 10% factor; the
  // field bound on B(0,m) uses the Lipschitz envelope ||f(0)|| + kappa m.
  double m_used;
  if (setup.m) {
    m_used = *setup.m;
  } else {
    Trajectory plant = integrate(set_c, f, x0, cfg);
    if (!plant.ok()) {
      throw HypothesisViolation("observer_run: preliminary plant run aborted: " +
                                plant.abort_reason);
    }
    double mx = 0.0;
    for (const Vec& s : plant.states) mx = std::max(mx, s.norm());
    m_used = 1.1 * mx;
  }
  double M_used = setup.M ? *setup.M
                          : f(Vec::Zero(n)).norm() + f.kappa * m_used;
  rep.m_used = m_used;
  rep.M_used = M_used;

  const double r = set_c.prox_constant();
  rep.beta = std::isinf(r) ? setup.delta
                           : setup.delta - (M_used + setup.epsilon) / r;
  if (!(rep.beta > 0)) {
    throw HypothesisViolation(
        "observer_run: epsilon < delta r - M fails (beta <= 0)");
  }
  rep.checks.push_back("epsilon < delta r - M: ok (beta = " +
                       std::to_string(rep.beta) + ")");

  auto lg = [&](const Vec& u) { return setup.L(setup.G(u)); };
  auto fres = [&](const Vec& u) { return Vec(f(u) - lg(u)); };

  // Hypothesis (6.105): ||L(G(x)) - L(G(y))|| <= epsilon whenever
  // ||x - y|| <= 3 eta. (6.106): strong monotonicity of -(f - L o G) with
  // modulus delta on B(0, m + 3 eta). Validated on random pairs up front and
  // along the trajectory below.
  std::mt19937_64 rng(20240901ull);
  double ball = m_used + 3.0 * setup.eta;
  std::uniform_real_distribution<double> urad(0.0, 1.0);
  for (int i = 0; i < 128; ++i) {
    Vec a = std::pow(urad(rng), 1.0 / n) * ball * random_direction(rng, n);
    Vec dir = random_direction(rng, n);
    Vec b = a + (urad(rng) * 3.0 * setup.eta) * dir;
    if ((lg(a) - lg(b)).norm() > setup.epsilon * (1.0 + 1e-9)) {
      throw HypothesisViolation("observer_run: condition (6.105) fails");
    }
    if (b.norm() <= ball) {
      double lhs = (a - b).dot(fres(a) - fres(b));
      double rhs = -setup.delta * (a - b).squaredNorm();
      if (lhs > rhs + 1e-9 * (1.0 + (a - b).squaredNorm())) {
        throw HypothesisViolation("observer_run: condition (6.106) fails");
      }
    }
  }
  rep.checks.push_back("(6.105) and (6.106) on sampled pairs: ok");

  VectorField coupled = build_coupled_field(f, setup.L, setup.G, n);
  ProxSet product = ProxSet::product(set_c, set_c);
  Vec y0(2 * n);
  y0 << z0, x0;
  rep.coupled = integrate(product, coupled, y0, cfg);
  if (!rep.coupled.ok()) {
    throw HypothesisViolation("observer_run: coupled integration aborted: " +
                              rep.coupled.abort_reason);
  }

  for (std::size_t k = 0; k < rep.coupled.states.size(); ++k) {
    Vec zh = rep.coupled.states[k].head(n);
    Vec xp = rep.coupled.states[k].tail(n);
    if (xp.norm() > m_used * (1.0 + 1e-9)) {
      throw HypothesisViolation("observer_run: plant bound m violated online");
    }
    double e = (zh - xp).norm();
    if (e <= 3.0 * setup.eta &&
        (lg(zh) - lg(xp)).norm() > setup.epsilon * (1.0 + 1e-9)) {
      throw HypothesisViolation("observer_run: condition (6.105) fails on trajectory");
    }
    rep.times.push_back(rep.coupled.times[k]);
    rep.errors.push_back(e);
    rep.bounds.push_back(e0 * std::exp(-0.5 * rep.beta * rep.coupled.times[k]));
  }

  rep.bound_ok = true;
  for (std::size_t k = 0; k < rep.errors.size(); ++k) {
    if (rep.errors[k] > rep.bounds[k] * (1.0 + tol_obs) + 1e-14) {
      rep.bound_ok = false;
      break;
    }
  }

  // Rate fit on log e_k, skipping the initial transient and the fp floor.
  std::size_t skip = rep.errors.size() / 20;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = skip; k < rep.errors.size(); ++k) {
    if (rep.errors[k] <= 1e-10) continue;
    double t = rep.times[k];
    double y = std::log(rep.errors[k]);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++cnt;
  }
  if (cnt >= 2 && sxx * cnt - sx * sx > 1e-300) {
    rep.fitted_rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }
  return rep;
}

GainReport design_linear_gain(const Mat& A, const Mat& G, double rho,
                              double delta, double epsilon) {
  if (!(rho > 0)) throw Error("design_linear_gain: rho must be positive");
  GainReport rep;
  rep.L = rho * G.transpose();
  Mat test = 0.5 * (A + A.transpose()) - rho * G.transpose() * G +
             delta * Mat::Identity(A.rows(), A.cols());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (test + test.transpose()));
  rep.max_eig = es.eigenvalues().maxCoeff();
  rep.pass = rep.max_eig <= 1e-9;
  double na = spectral_norm(A);
  double nlg = spectral_norm(rep.L * G);
  double t1 = na > 0 ? epsilon / (6.0 * na) : kInfiniteR;
  double t2 = nlg > 0 ? epsilon / (3.0 * nlg) : kInfiniteR;
  rep.eta = std::min(t1, t2);
  return rep;
}

NdcsSystem ndcs_build(const Mat& H, const Vec& c) {
  Eigen::FullPivLU<Mat> lu(H);
  if (lu.rank() < H.rows()) {
    throw QualificationFailure("ndcs_build: H must have full row rank");
  }
  return NdcsSystem{ProxSet::polyhedral(H, c), H, c};
}

ComplementarityReport NdcsSystem::extract_multipliers(
    const Trajectory& traj, const VectorField& f) const {
  ComplementarityReport rep;
  Eigen::LLT<Mat> gram(H * H.transpose());
  for (std::size_t k = 0; k < traj.velocities.size(); ++k) {
    // v - f(x) = H^T lambda; normals live at the projected (new) state.
    Vec rhs = traj.velocities[k] - f(traj.states[k]);
    Vec lambda = gram.solve(H * rhs);
    Vec g_next = H * traj.states[k + 1] + c;
    rep.multipliers.push_back(lambda);
    rep.max_negativity =
        std::max(rep.max_negativity, std::max(0.0, -lambda.minCoeff()));
    rep.max_infeasibility =
        std::max(rep.max_infeasibility, std::max(0.0, -g_next.minCoeff()));
    rep.max_product = std::max(rep.max_product, std::abs(lambda.dot(g_next)));
    if (!rep.activation_step &&
        (g_next.minCoeff() <= 1e-9 * (1.0 + traj.states[k + 1].norm()) ||
         lambda.maxCoeff() > 1e-3)) {
      rep.activation_step = k;
    }
  }
  return rep;
}

std::optional<Mat> search_metric(const Mat& A, const Mat& B, const Mat& D,
                                 double delta) {
  const int n = static_cast<int>(A.rows());
  if (n > 3) return std::nullopt;

  auto feasible = [&](const Mat& P) {
    PassivityReport r = verify_passivity(P, A, B, D, delta, 1e-10, 1e-9);
    return r.all();
  };

  // Direct candidate: solve P B = D^T in least squares over symmetric P.
  {
    const int un = n * (n + 1) / 2;
    Mat lhs = Mat::Zero(n * B.cols(), un);
    Vec rhs(n * B.cols());
    auto unpack = [&](const Vec& p) {
      Mat P(n, n);
      int idx = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          P(i, j) = P(j, i) = p[idx++];
        }
      return P;
    };
    int row = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < B.cols(); ++j, ++row) {
        rhs[row] = D.transpose()(i, j);
        int idx = 0;
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) {
            double coef = 0.0;
            if (a == i) coef += B(b, j);
            if (b == i && a != b) coef += B(a, j);
            lhs(row, idx++) = coef;
          }
      }
    }
    Vec p = lhs.completeOrthogonalDecomposition().solve(rhs);
    Mat P = unpack(p);
    if ((P * B - D.transpose()).cwiseAbs().maxCoeff() <= 1e-10 && feasible(P)) {
      return P;
    }
  }

  // Eigenvalue search over P = Q^T diag(p) Q.
  std::vector<double> scales;
  for (int e = -2; e <= 2; ++e) scales.push_back(std::pow(10.0, 0.5 * e));
  auto try_diag = [&](const Mat& Q) -> std::optional<Mat> {
    std::vector<int> idx(n, 0);
    while (true) {
      Vec p(n);
      for (int i = 0; i < n; ++i) p[i] = scales[idx[i]];
      Mat P = Q.transpose() * p.asDiagonal() * Q;
      if ((P * B - D.transpose()).cwiseAbs().maxCoeff() <= 1e-8 && feasible(P)) {
        return P;
      }
      int k = 0;
      while (k < n && ++idx[k] == static_cast<int>(scales.size())) idx[k++] = 0;
      if (k == n) break;
    }
    return std::nullopt;
  };

  const int angle_steps = 12;
  if (n == 1) {
    if (auto P = try_diag(Mat::Identity(1, 1))) return P;
  } else if (n == 2) {
    for (int a = 0; a < angle_steps; ++a) {
      double th = std::numbers::pi * a / angle_steps;
      Mat Q(2, 2);
      Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      if (auto P = try_diag(Q)) return P;
    }
  } else {
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int cidx = 0; cidx < 6; ++cidx) {
          double ta = std::numbers::pi * a / 6, tb = std::numbers::pi * b / 6,
                 tc = std::numbers::pi * cidx / 6;
          Mat Ra(3, 3), Rb(3, 3), Rc(3, 3);
          Ra << 1, 0, 0, 0, std::cos(ta), -std::sin(ta), 0, std::sin(ta),
              std::cos(ta);
          Rb << std::cos(tb), 0, std::sin(tb), 0, 1, 0, -std::sin(tb), 0,
              std::cos(tb);
          Rc << std::cos(tc), -std::sin(tc), 0, std::sin(tc), std::cos(tc), 0,
              0, 0, 1;
          if (auto P = try_diag(Ra * Rb * Rc)) return P;
        }
  }
  return std::nullopt;
}

}  // namespace proxdi
