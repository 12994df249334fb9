#include "proxdi/lyapunov.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace proxdi {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "Certified";
    case Verdict::Violated: return "Violated";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

void CertificateReport::write_csv(std::ostream& os) const {
  const int n = samples.empty() ? 0 : static_cast<int>(samples.front().size());
  for (int i = 0; i < n; ++i) os << "x_" << i << ",";
  os << "margin\n";
  char buf[64];
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", samples[k][i]);
      os << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", margins[k]);
    os << buf << "\n";
  }
}

namespace {

std::string point_str(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// The domain contract dom V ⊆ C is not removable (a tangency criterion can
// hold at the single contact point while V fails to decay along the flow).
void verify_domain_contract(const ProxSet& set, const LyapunovCandidate& cand,
                            const Tolerances& tol) {
  if (!cand.domain) return;
  SamplerSpec spec;
  spec.mode = SamplerSpec::Mode::Grid;
  spec.density = 0.05;
  spec.seed = 9001;
  std::vector<Vec> pts = sample_set(*cand.domain, spec);
  SamplerSpec rnd;
  rnd.mode = SamplerSpec::Mode::Random;
  rnd.count = 128;
  rnd.seed = 9001;
  for (const Vec& p : sample_set(*cand.domain, rnd)) pts.push_back(p);
  double guard = std::max(tol.mem, 1e-7);
  for (const Vec& p : pts) {
    if (!set.contains(p, guard)) {
      throw DomainViolation("dom V is not contained in C: sampled point " +
                            point_str(p) + " lies outside C");
    }
  }
}

double margin_at(const ProxSet& set, const VectorField& f,
                 const LyapunovCandidate& cand, const Vec& x,
                 const Tolerances& tol) {
  Vec d = right_derivative(set, f, x, tol);
  return cand.gradV(x).dot(d) + cand.a * cand.V(x) + cand.W(x);
}

}  // namespace

double pointwise_certificate(const ProxSet& set, const VectorField& f,
                             const LyapunovCandidate& cand, const Vec& x,
                             const Tolerances& tol) {
  verify_domain_contract(set, cand, tol);
  if (!set.contains(x, tol.mem)) {
    throw DomainViolation("pointwise certificate at " + point_str(x) +
                          ": point not in C");
  }
  if (cand.domain && !cand.domain->contains(x, std::max(tol.mem, 1e-7))) {
    throw DomainViolation("pointwise certificate at " + point_str(x) +
                          ": point not in dom V");
  }
  return margin_at(set, f, cand, x, tol);
}

CertificateReport certify_on_samples(const ProxSet& set, const VectorField& f,
                                     const LyapunovCandidate& cand,
                                     const SamplerSpec& sampler, double band) {
  Tolerances tol;
  verify_domain_contract(set, cand, tol);

  std::vector<Vec> pts =
      cand.domain ? sample_set(*cand.domain, sampler) : sample_set(set, sampler);

  CertificateReport rep;
  rep.criterion = cand.plus_indicator ? "proximal-sum (ii)" : "smooth (i)";
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (const Vec& p : pts) {
    double mg = margin_at(set, f, cand, p, tol);
    rep.samples.push_back(p);
    rep.margins.push_back(mg);
    if (mg > rep.worst_margin) {
      rep.worst_margin = mg;
      rep.witness = p;
    }
  }
  if (rep.samples.empty()) throw Error("certify_on_samples: empty sample set");

  if (rep.worst_margin > band) {
    rep.verdict = Verdict::Violated;
  } else if (rep.worst_margin <= -band) {
    rep.verdict = Verdict::Certified;
    rep.witness.reset();
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.witness.reset();
  }
  return rep;
}

DecayReport trajectory_decay_check(const Trajectory& traj,
                                   const LyapunovCandidate& cand,
                                   double tol_dec, bool trapezoid) {
  if (traj.states.empty()) throw Error("decay check: empty trajectory");
  DecayReport rep;
  double h = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0.0;
  double integral = 0.0;
  double prev_w = cand.W(traj.states.front());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Vec& x = traj.states[k];
    if (cand.domain && !cand.domain->contains(x, 1e-6)) {
      throw DomainViolation("decay check: trajectory left dom V at step " +
                            std::to_string(k));
    }
    if (k > 0) {
      double wk = cand.W(traj.states[k]);
      integral += trapezoid ? 0.5 * h * (prev_w + wk) : h * prev_w;
      prev_w = wk;
    }
    rep.values.push_back(std::exp(cand.a * traj.times[k]) * cand.V(x) + integral);
  }
  for (std::size_t k = 1; k < rep.values.size(); ++k) {
    rep.max_rise = std::max(rep.max_rise, rep.values[k] - rep.values[k - 1]);
    rep.max_excess = std::max(rep.max_excess, rep.values[k] - rep.values[0]);
  }
  rep.ok = rep.max_excess <= tol_dec && rep.max_rise <= tol_dec;
  return rep;
}

CertificateReport invariance_certificate(const ProxSet& set_c,
                                         const ProxSet& subset_s,
                                         const VectorField& f,
                                         const SamplerSpec& sampler,
                                         double tol_cert) {
  Tolerances tol;
  std::vector<Vec> pts = sample_set(subset_s, sampler);
  if (pts.empty()) throw Error("invariance certificate: empty sample set");

  CertificateReport rep;
  rep.criterion = "tangency (i) + dual vote (iii)";
  rep.worst_margin = 0.0;
  std::mt19937_64 rng(sampler.seed);
  std::size_t dual_violations = 0;

  for (const Vec& p : pts) {
    if (!set_c.contains(p, std::max(1e-7, tol.mem))) {
      throw SubsetViolation("invariance certificate: sampled point " +
                            point_str(p) + " of S lies outside C");
    }
    Vec d = right_derivative(set_c, f, p, tol);
    // Primary criterion: the selection must be tangent to S.
    ConeProjection cp = subset_s.cone_project(p, d, 1e-5, tol);
    double resid = cp.normal_part.norm();
    rep.samples.push_back(p);
    rep.margins.push_back(resid);
    if (resid > rep.worst_margin) {
      rep.worst_margin = resid;
      rep.witness = p;
    }
    // Dual vote: sampled proximal normals xi of S must satisfy <xi, d> <= 0.
    for (int j = 0; j < 4; ++j) {
      Vec w = random_direction(rng, subset_s.dim());
      Vec xi = subset_s.cone_project(p, w, 1e-5, tol).normal_part;
      if (xi.norm() < 1e-12) continue;
      if (xi.dot(d) > tol_cert * (1.0 + d.norm())) ++dual_violations;
    }
  }

  double scale = 1.0;
  if (rep.worst_margin <= tol_cert) {
    rep.verdict = dual_violations == 0 ? Verdict::Certified : Verdict::Inconclusive;
    if (rep.verdict == Verdict::Certified) rep.witness.reset();
  } else if (rep.worst_margin > 1e-3 * scale) {
    rep.verdict = Verdict::Violated;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  return rep;
}

RadiusReport lyapunov_radius_check(const ProxSet& set, const VectorField& f,
                                   double delta, double epsilon, double L,
                                   const SamplerSpec& sampler,
                                   const IntegratorConfig& cfg, int n_starts,
                                   double tol) {
  const int d = set.dim();
  Vec origin = Vec::Zero(d);
  if (!set.contains(origin, 1e-9)) {
    throw Error("radius check requires 0 in C");
  }
  if (f(origin).norm() > 1e-10 * (1.0 + L)) {
    throw Error("radius check requires f(0) = 0");
  }

  RadiusReport rep;
  double r = set.prox_constant();
  rep.radius = std::min(std::isinf(r) ? epsilon : r * delta / L, epsilon);

  // Pointwise condition <x, f(x)> + delta ||x||^2 <= 0 on C ∩ B(0, epsilon).
  SamplerSpec spec = sampler;
  spec.window = std::make_pair(Vec::Constant(d, -epsilon), Vec::Constant(d, epsilon));
  for (const Vec& p : sample_set(set, spec)) {
    if (p.norm() > epsilon + 1e-12) continue;
    double c = p.dot(f(p)) + delta * p.squaredNorm();
    if (c > 1e-10 * (1.0 + p.squaredNorm())) {
      throw ConditionFailed("stability condition <x,f(x)> + delta||x||^2 <= 0 "
                            "fails at " + point_str(p) + " with value " +
                            std::to_string(c), p);
    }
  }
  rep.condition_holds = true;

  // Decay from sampled starts strictly inside the attraction ball.
  std::mt19937_64 rng(sampler.seed + 1);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  int produced = 0, guard = 0;
  while (produced < n_starts && guard++ < 200 * n_starts) {
    Vec x0 = u(rng) * rep.radius * random_direction(rng, d);
    if (!set.member(x0, 0.0)) {
      try {
        x0 = set.project(x0);
      } catch (const TubeViolation&) {
        continue;
      }
      if (x0.norm() >= rep.radius) continue;
    }
    Trajectory traj = integrate(set, f, x0, cfg);
    if (!traj.ok()) throw Error("radius check: integration aborted");
    double xn0 = x0.norm();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      double allowed =
          xn0 * std::exp(-0.5 * delta * traj.times[k]) * (1.0 + tol) + 1e-12;
      rep.worst_margin = std::min(rep.worst_margin,
                                  allowed - traj.states[k].norm());
    }
    ++produced;
  }
  rep.starts_checked = produced;
  rep.decay_ok = produced > 0 && rep.worst_margin >= 0.0;
  return rep;
}

}  // namespace proxdi
