#include "proxdi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <variant>

namespace proxdi {

namespace {

double sq(double v) { return v * v; }

struct BallData {
  Vec center;
  double radius;
};
struct BoxData {
  Vec lower, upper;
};
struct OrthantData {
  int m;
};
struct ShellData {
  Vec center;
  double r_in, r_out;
};
struct BallCompData {
  Vec center;
  double radius;
};
struct PreimageData {
  Mat D;
  Mat pinv;             // Moore-Penrose pseudo-inverse of D
  double sigma_max;     // largest singular value
  double sigma_min_pos; // least positive singular value
  std::shared_ptr<const ProxSet> inner;
};
struct ProductData {
  std::shared_ptr<const ProxSet> left, right;
};
struct PolyData {
  Mat H;
  Vec c;
};

using Payload = std::variant<BallData, BoxData, OrthantData, ShellData,
                             BallCompData, PreimageData, ProductData, PolyData>;

}  // namespace

struct ProxSet::Impl {
  SetKind kind;
  int dim;
  Payload data;
};

void require_finite(const Vec& x, const std::string& what) {
  if (!x.allFinite()) {
    throw Error(what + ": non-finite entries");
  }
}

std::string to_string(SetKind k) {
  switch (k) {
    case SetKind::Ball: return "ball";
    case SetKind::Box: return "box";
    case SetKind::Orthant: return "orthant";
    case SetKind::SphereShell: return "sphere_shell";
    case SetKind::BallComplement: return "ball_complement";
    case SetKind::LinearPreimage: return "linear_preimage";
    case SetKind::Product: return "product";
    case SetKind::LevelSetPolyhedral: return "polyhedral";
  }
  return "?";
}

ProxSet::ProxSet(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

ProxSet ProxSet::ball(Vec center, double radius) {
  require_finite(center, "ball center");
  if (radius <= 0) throw Error("ball radius must be positive");
  int n = static_cast<int>(center.size());
  return ProxSet(std::make_shared<Impl>(
      Impl{SetKind::Ball, n, BallData{std::move(center), radius}}));
}

ProxSet ProxSet::box(Vec lower, Vec upper) {
  require_finite(lower, "box lower");
  require_finite(upper, "box upper");
  if (lower.size() != upper.size()) throw DimensionMismatch("box bounds");
  if (((upper - lower).array() < 0).any()) {
    throw Error("box needs lower <= upper");
  }
  int n = static_cast<int>(lower.size());
  return ProxSet(std::make_shared<Impl>(
      Impl{SetKind::Box, n, BoxData{std::move(lower), std::move(upper)}}));
}

ProxSet ProxSet::orthant(int m) {
  if (m <= 0) throw Error("orthant dimension must be positive");
  return ProxSet(std::make_shared<Impl>(Impl{SetKind::Orthant, m, OrthantData{m}}));
}

ProxSet ProxSet::sphere_shell(Vec center, double r_in, double r_out) {
  require_finite(center, "shell center");
  if (!(r_in > 0) || r_out < r_in) {
    throw Error("sphere shell needs 0 < r_in <= r_out");
  }
  int n = static_cast<int>(center.size());
  return ProxSet(std::make_shared<Impl>(
      Impl{SetKind::SphereShell, n, ShellData{std::move(center), r_in, r_out}}));
}

ProxSet ProxSet::ball_complement(Vec center, double radius) {
  require_finite(center, "ball complement center");
  if (radius <= 0) throw Error("ball complement radius must be positive");
  int n = static_cast<int>(center.size());
  return ProxSet(std::make_shared<Impl>(
      Impl{SetKind::BallComplement, n, BallCompData{std::move(center), radius}}));
}

ProxSet ProxSet::linear_preimage(Mat D, ProxSet inner) {
  require_finite(Vec(D.reshaped()), "preimage map");
  if (D.rows() != inner.dim()) {
    throw DimensionMismatch("preimage map rows must match inner dimension");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(D.transpose() * D);
  const Vec evs = es.eigenvalues();
  double max_ev = evs.maxCoeff();
  if (!(max_ev > 0) || max_ev < 1e-28) {
    throw SingularMap("preimage map is (numerically) zero");
  }
  double min_pos = max_ev;
  for (int i = 0; i < evs.size(); ++i) {
    if (evs[i] > 1e-14 * max_ev) min_pos = std::min(min_pos, evs[i]);
  }
  PreimageData pd;
  pd.D = std::move(D);
  pd.pinv = pd.D.completeOrthogonalDecomposition().pseudoInverse();
  pd.sigma_max = std::sqrt(max_ev);
  pd.sigma_min_pos = std::sqrt(min_pos);
  pd.inner = std::make_shared<const ProxSet>(std::move(inner));
  int n = static_cast<int>(pd.D.cols());
  return ProxSet(std::make_shared<Impl>(
      Impl{SetKind::LinearPreimage, n, std::move(pd)}));
}

ProxSet ProxSet::product(ProxSet left, ProxSet right) {
  int n = left.dim() + right.dim();
  ProductData pd{std::make_shared<const ProxSet>(std::move(left)),
                 std::make_shared<const ProxSet>(std::move(right))};
  return ProxSet(std::make_shared<Impl>(Impl{SetKind::Product, n, std::move(pd)}));
}

ProxSet ProxSet::polyhedral(Mat H, Vec c) {
  require_finite(Vec(H.reshaped()), "polyhedral map");
  require_finite(c, "polyhedral offset");
  if (H.rows() != c.size()) throw DimensionMismatch("polyhedral H rows vs c");
  if (H.rows() == 0 || H.norm() == 0) throw SingularMap("polyhedral map is zero");
  int n = static_cast<int>(H.cols());
  return ProxSet(std::make_shared<Impl>(
      Impl{SetKind::LevelSetPolyhedral, n, PolyData{std::move(H), std::move(c)}}));
}

SetKind ProxSet::kind() const { return impl_->kind; }
int ProxSet::dim() const { return impl_->dim; }

bool ProxSet::convex() const {
  switch (impl_->kind) {
    case SetKind::Ball:
    case SetKind::Box:
    case SetKind::Orthant:
    case SetKind::LevelSetPolyhedral:
      return true;
    case SetKind::SphereShell:
    case SetKind::BallComplement:
      return false;
    case SetKind::LinearPreimage:
      return std::get<PreimageData>(impl_->data).inner->convex();
    case SetKind::Product: {
      const auto& pd = std::get<ProductData>(impl_->data);
      return pd.left->convex() && pd.right->convex();
    }
  }
  return false;
}

double ProxSet::prox_constant() const {
  switch (impl_->kind) {
    case SetKind::Ball:
    case SetKind::Box:
    case SetKind::Orthant:
    case SetKind::LevelSetPolyhedral:
      return kInfiniteR;
    case SetKind::SphereShell:
      return std::get<ShellData>(impl_->data).r_in;
    case SetKind::BallComplement:
      return std::get<BallCompData>(impl_->data).radius;
    case SetKind::LinearPreimage: {
      const auto& pd = std::get<PreimageData>(impl_->data);
      double ri = pd.inner->prox_constant();
      if (std::isinf(ri)) return kInfiniteR;
      return ri * pd.sigma_min_pos / sq(pd.sigma_max);
    }
    case SetKind::Product: {
      const auto& pd = std::get<ProductData>(impl_->data);
      return std::min(pd.left->prox_constant(), pd.right->prox_constant());
    }
  }
  return kInfiniteR;
}

// ---------------------------------------------------------------------------
// membership

bool ProxSet::member(const Vec& x, double band) const {
  if (x.size() != impl_->dim) throw DimensionMismatch("member: wrong dimension");
  switch (impl_->kind) {
    case SetKind::Ball: {
      const auto& d = std::get<BallData>(impl_->data);
      return (x - d.center).norm() <= d.radius + band;
    }
    case SetKind::Box: {
      const auto& d = std::get<BoxData>(impl_->data);
      return ((x - d.lower).array() >= -band).all() &&
             ((d.upper - x).array() >= -band).all();
    }
    case SetKind::Orthant:
      return (x.array() >= -band).all();
    case SetKind::SphereShell: {
      const auto& d = std::get<ShellData>(impl_->data);
      double rho = (x - d.center).norm();
      return rho >= d.r_in - band && rho <= d.r_out + band;
    }
    case SetKind::BallComplement: {
      const auto& d = std::get<BallCompData>(impl_->data);
      return (x - d.center).norm() >= d.radius - band;
    }
    case SetKind::LinearPreimage: {
      const auto& d = std::get<PreimageData>(impl_->data);
      return d.inner->member(d.D * x, band * d.sigma_max);
    }
    case SetKind::Product: {
      const auto& d = std::get<ProductData>(impl_->data);
      int nl = d.left->dim();
      return d.left->member(x.head(nl), band) &&
             d.right->member(x.tail(x.size() - nl), band);
    }
    case SetKind::LevelSetPolyhedral: {
      const auto& d = std::get<PolyData>(impl_->data);
      Vec g = d.H * x + d.c;
      for (int i = 0; i < g.size(); ++i) {
        double scale = std::max(1.0, d.H.row(i).norm());
        if (g[i] < -band * scale) return false;
      }
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// projection helpers

namespace {

// Exact projection onto {y : G y + g >= 0} by active-set enumeration.
// Valid for modest row counts; the NDCS scenarios stay well below the cap.
Vec project_onto_polyhedron(const Mat& G, const Vec& g, const Vec& x) {
  const int m = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());
  if (m > 16) throw Error("polyhedral projection limited to 16 rows");

  const double scale = 1.0 + x.norm();
  const double feas_tol = 1e-10 * scale;
  const double mult_tol = 1e-10 * scale;

  bool found = false;
  Vec best;
  double best_d2 = std::numeric_limits<double>::infinity();

  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) rows.push_back(i);
    }
    const int k = static_cast<int>(rows.size());
    if (k > n) continue;

    Vec y;
    if (k == 0) {
      y = x;
    } else {
      Mat A(k, n);
      Vec a(k);
      for (int i = 0; i < k; ++i) {
        A.row(i) = G.row(rows[i]);
        a[i] = g[rows[i]];
      }
      Mat AAt = A * A.transpose();
      Eigen::FullPivLU<Mat> lu(AAt);
      if (lu.rank() < k) continue;  // dependent subset; covered elsewhere
      Vec mu = -lu.solve(A * x + a);
      if ((mu.array() < -mult_tol).any()) continue;  // KKT sign fails
      y = x + A.transpose() * mu;
    }
    Vec res = G * y + g;
    bool feasible = true;
    for (int i = 0; i < m; ++i) {
      double row_scale = std::max(1.0, G.row(i).norm());
      if (res[i] < -feas_tol * row_scale) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    double d2 = (y - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = y;
      found = true;
    }
  }
  if (!found) throw Error("polyhedron appears empty (no KKT candidate)");
  return best;
}

// Projection of v onto the polyhedral cone {w : A w >= 0}.
Vec project_onto_poly_cone(const Mat& A, const Vec& v) {
  return project_onto_polyhedron(A, Vec::Zero(A.rows()), v);
}

}  // namespace

Vec ProxSet::project(const Vec& x) const {
  if (x.size() != impl_->dim) throw DimensionMismatch("project: wrong dimension");
  require_finite(x, "project input");
  if (member(x, 0.0)) return x;

  switch (impl_->kind) {
    case SetKind::Ball: {
      const auto& d = std::get<BallData>(impl_->data);
      Vec u = x - d.center;
      return d.center + (d.radius / u.norm()) * u;
    }
    case SetKind::Box: {
      const auto& d = std::get<BoxData>(impl_->data);
      return x.cwiseMax(d.lower).cwiseMin(d.upper);
    }
    case SetKind::Orthant:
      return x.cwiseMax(0.0);
    case SetKind::SphereShell: {
      const auto& d = std::get<ShellData>(impl_->data);
      Vec u = x - d.center;
      double rho = u.norm();
      if (rho > d.r_out) return d.center + (d.r_out / rho) * u;
      if (rho < 1e-13 * std::max(1.0, d.r_in)) {
        throw TubeViolation("shell projection ambiguous near the center");
      }
      return d.center + (d.r_in / rho) * u;
    }
    case SetKind::BallComplement: {
      const auto& d = std::get<BallCompData>(impl_->data);
      Vec u = x - d.center;
      double rho = u.norm();
      if (rho < 1e-13 * std::max(1.0, d.radius)) {
        throw TubeViolation("ball-complement projection ambiguous at the center");
      }
      return d.center + (d.radius / rho) * u;
    }
    case SetKind::Product: {
      const auto& d = std::get<ProductData>(impl_->data);
      int nl = d.left->dim();
      Vec y(x.size());
      y.head(nl) = d.left->project(x.head(nl));
      y.tail(x.size() - nl) = d.right->project(x.tail(x.size() - nl));
      return y;
    }
    case SetKind::LevelSetPolyhedral: {
      const auto& d = std::get<PolyData>(impl_->data);
      return project_onto_polyhedron(d.H, d.c, x);
    }
    case SetKind::LinearPreimage:
      break;  // handled below
  }

  // Generic preimage path: the nearest point of {y : D y in S} over u in S
  // is y(u) = x - pinv(D)(Dx - u); minimize phi(u) = 0.5||pinv(D)(Dx-u)||^2
  // by projected gradient over S, multi-started from perturbed seeds.
  const auto& pd = std::get<PreimageData>(impl_->data);
  const ProxSet& S = *pd.inner;
  const Vec Dx = pd.D * x;
  const Mat M = pd.pinv.transpose() * pd.pinv;
  const double step = sq(pd.sigma_min_pos);  // 1 / ||M||

  auto phi = [&](const Vec& u) { return 0.5 * (pd.pinv * (Dx - u)).squaredNorm(); };

  std::vector<Vec> seeds;
  auto try_seed = [&](const Vec& p) {
    try {
      seeds.push_back(S.project(p));
    } catch (const TubeViolation&) {
    }
  };
  try_seed(Dx);
  auto [slo, shi] = S.bounding_box(4.0);
  double extent = (shi - slo).norm() + 1.0;
  for (int i = 0; i < S.dim(); ++i) {
    Vec e = Vec::Zero(S.dim());
    e[i] = 0.35 * extent;
    try_seed(Dx + e);
    try_seed(Dx - e);
  }
  if (seeds.empty()) {
    throw TubeViolation("preimage projection: no reachable seed in inner set");
  }

  Vec best_u;
  double best_phi = std::numeric_limits<double>::infinity();
  for (Vec u : seeds) {
    for (int it = 0; it < 800; ++it) {
      Vec grad = M * (u - Dx);
      double t = step;
      Vec u_next;
      bool moved = false;
      for (int shrink = 0; shrink < 30; ++shrink) {
        try {
          u_next = S.project(u - t * grad);
          moved = true;
          break;
        } catch (const TubeViolation&) {
          t *= 0.5;
        }
      }
      if (!moved) break;
      if ((u_next - u).norm() <= 1e-15 * (1.0 + u.norm())) {
        u = u_next;
        break;
      }
      u = u_next;
    }
    double p = phi(u);
    if (p < best_phi) {
      best_phi = p;
      best_u = u;
    }
  }

  Vec y = x - pd.pinv * (Dx - best_u);
  double dist = (x - y).norm();
  double r = prox_constant();
  if (!convex() && dist >= r * (1.0 - 1e-10)) {
    throw TubeViolation("preimage projection outside the uniqueness tube");
  }
  return y;
}

double ProxSet::distance(const Vec& x) const {
  if (member(x, 0.0)) return 0.0;
  return (x - project(x)).norm();
}

bool ProxSet::contains(const Vec& x, double tol_mem) const {
  if (tol_mem <= 0) throw Error("contains: tol_mem must be positive");
  if (member(x, 0.0)) return true;
  try {
    return distance(x) <= tol_mem;
  } catch (const TubeViolation&) {
    return false;  // far outside the tube, hence far outside the set
  }
}

// ---------------------------------------------------------------------------
// cone projection

namespace {

// Tangent projection when the normal cone is a single ray {t*n : t >= 0}.
Vec tangent_vs_ray(const Vec& v, const Vec& n_unit) {
  double c = v.dot(n_unit);
  return c > 0 ? Vec(v - c * n_unit) : v;
}

}  // namespace

ConeProjection ProxSet::cone_project(const Vec& x, const Vec& v, double h_fd,
                                     const Tolerances& tol) const {
  if (x.size() != impl_->dim || v.size() != impl_->dim) {
    throw DimensionMismatch("cone_project: wrong dimension");
  }
  if (!(h_fd > 0)) throw Error("cone_project: h_fd must be positive");
  if (!contains(x, tol.mem)) {
    throw Error("cone_project: base point not in the set");
  }

  const double bnd = tol.boundary;
  std::optional<Vec> tangent;

  switch (impl_->kind) {
    case SetKind::Ball: {
      const auto& d = std::get<BallData>(impl_->data);
      Vec u = x - d.center;
      double rho = u.norm();
      if (d.radius - rho > bnd) {
        tangent = v;  // interior
      } else {
        tangent = tangent_vs_ray(v, Vec(u / rho));
      }
      break;
    }
    case SetKind::Box: {
      const auto& d = std::get<BoxData>(impl_->data);
      Vec t = v;
      for (int i = 0; i < x.size(); ++i) {
        bool low = x[i] - d.lower[i] <= bnd;
        bool high = d.upper[i] - x[i] <= bnd;
        if (low && high) {
          t[i] = 0.0;  // pinned coordinate, normal line
        } else if (low) {
          t[i] = std::max(v[i], 0.0);
        } else if (high) {
          t[i] = std::min(v[i], 0.0);
        }
      }
      tangent = t;
      break;
    }
    case SetKind::Orthant: {
      Vec t = v;
      for (int i = 0; i < x.size(); ++i) {
        if (x[i] <= bnd) t[i] = std::max(v[i], 0.0);
      }
      tangent = t;
      break;
    }
    case SetKind::SphereShell: {
      const auto& d = std::get<ShellData>(impl_->data);
      Vec u = x - d.center;
      double rho = u.norm();
      Vec n = u / rho;
      if (d.r_out - d.r_in <= bnd) {
        tangent = v - v.dot(n) * n;  // sphere: normal cone is the full line
      } else if (rho - d.r_in <= bnd) {
        tangent = tangent_vs_ray(v, Vec(-n));  // inner boundary, inward normal
      } else if (d.r_out - rho <= bnd) {
        tangent = tangent_vs_ray(v, n);
      } else {
        tangent = v;
      }
      break;
    }
    case SetKind::BallComplement: {
      const auto& d = std::get<BallCompData>(impl_->data);
      Vec u = x - d.center;
      double rho = u.norm();
      if (rho - d.radius > bnd) {
        tangent = v;
      } else {
        tangent = tangent_vs_ray(v, Vec(-u / rho));
      }
      break;
    }
    case SetKind::Product: {
      const auto& d = std::get<ProductData>(impl_->data);
      int nl = d.left->dim();
      ConeProjection cl = d.left->cone_project(x.head(nl), v.head(nl), h_fd, tol);
      ConeProjection cr = d.right->cone_project(x.tail(x.size() - nl),
                                                v.tail(x.size() - nl), h_fd, tol);
      ConeProjection out;
      out.normal_part.resize(x.size());
      out.tangent_part.resize(x.size());
      out.normal_part << cl.normal_part, cr.normal_part;
      out.tangent_part << cl.tangent_part, cr.tangent_part;
      out.residual = std::abs(out.normal_part.dot(out.tangent_part));
      return out;
    }
    case SetKind::LevelSetPolyhedral: {
      const auto& d = std::get<PolyData>(impl_->data);
      Vec g = d.H * x + d.c;
      std::vector<int> active;
      for (int i = 0; i < g.size(); ++i) {
        double scale = std::max(1.0, d.H.row(i).norm());
        if (g[i] <= bnd * scale) active.push_back(i);
      }
      if (active.empty()) {
        tangent = v;
      } else {
        Mat A(active.size(), x.size());
        for (size_t i = 0; i < active.size(); ++i) A.row(i) = d.H.row(active[i]);
        tangent = project_onto_poly_cone(A, v);
      }
      break;
    }
    case SetKind::LinearPreimage:
      break;  // finite-difference fallback below
  }

  if (!tangent) {
    // Directional difference quotient of the projection with one Richardson
    // halving: t(h) = (Pi(x + h v) - x)/h, extrapolate 2 t(h/2) - t(h).
    double h = h_fd;
    for (int attempt = 0; attempt < 3; ++attempt) {
      Vec t1 = (project(x + h * v) - x) / h;
      Vec t2 = (project(x + 0.5 * h * v) - x) / (0.5 * h);
      Vec rich = 2.0 * t2 - t1;
      Vec normal = v - rich;
      double resid = std::abs(normal.dot(rich));
      if (resid <= tol.orth * (1.0 + v.squaredNorm())) {
        tangent = rich;
        break;
      }
      h *= 0.125;
    }
    if (!tangent) {
      throw NonconvergedFD("cone_project: finite-difference tangent did not stabilize");
    }
  }

  ConeProjection out;
  out.tangent_part = *tangent;
  out.normal_part = v - *tangent;
  out.residual = std::abs(out.normal_part.dot(out.tangent_part));
  return out;
}

// ---------------------------------------------------------------------------
// bounding boxes, accessors, serialization

std::pair<Vec, Vec> ProxSet::bounding_box(double unbounded_extent) const {
  const double ext = unbounded_extent;
  switch (impl_->kind) {
    case SetKind::Ball: {
      const auto& d = std::get<BallData>(impl_->data);
      return {d.center.array() - d.radius, d.center.array() + d.radius};
    }
    case SetKind::Box: {
      const auto& d = std::get<BoxData>(impl_->data);
      return {d.lower, d.upper};
    }
    case SetKind::Orthant:
      return {Vec::Zero(impl_->dim), Vec::Constant(impl_->dim, ext)};
    case SetKind::SphereShell: {
      const auto& d = std::get<ShellData>(impl_->data);
      return {d.center.array() - d.r_out, d.center.array() + d.r_out};
    }
    case SetKind::BallComplement: {
      const auto& d = std::get<BallCompData>(impl_->data);
      double w = d.radius + ext;
      return {d.center.array() - w, d.center.array() + w};
    }
    case SetKind::LinearPreimage: {
      const auto& d = std::get<PreimageData>(impl_->data);
      // Interval hull through the pseudo-inverse is valid when D is injective.
      if (d.D.cols() <= d.D.rows() &&
          d.sigma_min_pos > 1e-12 * d.sigma_max) {
        auto [lo, hi] = d.inner->bounding_box(ext);
        Vec out_lo(impl_->dim), out_hi(impl_->dim);
        for (int i = 0; i < impl_->dim; ++i) {
          double a = 0, b = 0;
          for (int j = 0; j < lo.size(); ++j) {
            double p = d.pinv(i, j);
            a += p >= 0 ? p * lo[j] : p * hi[j];
            b += p >= 0 ? p * hi[j] : p * lo[j];
          }
          out_lo[i] = a;
          out_hi[i] = b;
        }
        return {out_lo, out_hi};
      }
      return {Vec::Constant(impl_->dim, -ext), Vec::Constant(impl_->dim, ext)};
    }
    case SetKind::Product: {
      const auto& d = std::get<ProductData>(impl_->data);
      auto [llo, lhi] = d.left->bounding_box(ext);
      auto [rlo, rhi] = d.right->bounding_box(ext);
      Vec lo(impl_->dim), hi(impl_->dim);
      lo << llo, rlo;
      hi << lhi, rhi;
      return {lo, hi};
    }
    case SetKind::LevelSetPolyhedral:
      return {Vec::Constant(impl_->dim, -ext), Vec::Constant(impl_->dim, ext)};
  }
  return {Vec::Constant(impl_->dim, -ext), Vec::Constant(impl_->dim, ext)};
}

namespace {
void write_vec(std::ostream& os, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
}
void write_mat(std::ostream& os, const Mat& m) {
  os << m.rows() << " " << m.cols();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) os << " " << m(i, j);
}
}  // namespace

void ProxSet::write_block(std::ostream& os, int indent) const {
  std::string pad(indent, ' ');
  std::string pad2(indent + 2, ' ');
  os << pad << "set {\n";
  os << pad2 << "kind " << to_string(impl_->kind) << "\n";
  switch (impl_->kind) {
    case SetKind::Ball: {
      const auto& d = std::get<BallData>(impl_->data);
      os << pad2 << "center ";
      write_vec(os, d.center);
      os << "\n" << pad2 << "radius " << d.radius << "\n";
      break;
    }
    case SetKind::Box: {
      const auto& d = std::get<BoxData>(impl_->data);
      os << pad2 << "lower ";
      write_vec(os, d.lower);
      os << "\n" << pad2 << "upper ";
      write_vec(os, d.upper);
      os << "\n";
      break;
    }
    case SetKind::Orthant:
      os << pad2 << "dim " << impl_->dim << "\n";
      break;
    case SetKind::SphereShell: {
      const auto& d = std::get<ShellData>(impl_->data);
      os << pad2 << "center ";
      write_vec(os, d.center);
      os << "\n" << pad2 << "r_in " << d.r_in << "\n";
      os << pad2 << "r_out " << d.r_out << "\n";
      break;
    }
    case SetKind::BallComplement: {
      const auto& d = std::get<BallCompData>(impl_->data);
      os << pad2 << "center ";
      write_vec(os, d.center);
      os << "\n" << pad2 << "radius " << d.radius << "\n";
      break;
    }
    case SetKind::LinearPreimage: {
      const auto& d = std::get<PreimageData>(impl_->data);
      os << pad2 << "D ";
      write_mat(os, d.D);
      os << "\n";
      d.inner->write_block(os, indent + 2);
      break;
    }
    case SetKind::Product: {
      const auto& d = std::get<ProductData>(impl_->data);
      d.left->write_block(os, indent + 2);
      d.right->write_block(os, indent + 2);
      break;
    }
    case SetKind::LevelSetPolyhedral: {
      const auto& d = std::get<PolyData>(impl_->data);
      os << pad2 << "H ";
      write_mat(os, d.H);
      os << "\n" << pad2 << "c ";
      write_vec(os, d.c);
      os << "\n";
      break;
    }
  }
  os << pad << "}\n";
}

namespace {
[[noreturn]] void wrong_kind(const char* what) {
  throw Error(std::string("accessor ") + what + " used on wrong set kind");
}
}  // namespace

const Vec& ProxSet::center() const {
  switch (impl_->kind) {
    case SetKind::Ball: return std::get<BallData>(impl_->data).center;
    case SetKind::SphereShell: return std::get<ShellData>(impl_->data).center;
    case SetKind::BallComplement: return std::get<BallCompData>(impl_->data).center;
    default: wrong_kind("center");
  }
}
double ProxSet::radius() const {
  switch (impl_->kind) {
    case SetKind::Ball: return std::get<BallData>(impl_->data).radius;
    case SetKind::BallComplement: return std::get<BallCompData>(impl_->data).radius;
    default: wrong_kind("radius");
  }
}
const Vec& ProxSet::lower() const {
  if (impl_->kind != SetKind::Box) wrong_kind("lower");
  return std::get<BoxData>(impl_->data).lower;
}
const Vec& ProxSet::upper() const {
  if (impl_->kind != SetKind::Box) wrong_kind("upper");
  return std::get<BoxData>(impl_->data).upper;
}
double ProxSet::inner_radius() const {
  if (impl_->kind != SetKind::SphereShell) wrong_kind("inner_radius");
  return std::get<ShellData>(impl_->data).r_in;
}
double ProxSet::outer_radius() const {
  if (impl_->kind != SetKind::SphereShell) wrong_kind("outer_radius");
  return std::get<ShellData>(impl_->data).r_out;
}
const Mat& ProxSet::map() const {
  switch (impl_->kind) {
    case SetKind::LinearPreimage: return std::get<PreimageData>(impl_->data).D;
    case SetKind::LevelSetPolyhedral: return std::get<PolyData>(impl_->data).H;
    default: wrong_kind("map");
  }
}
const Vec& ProxSet::offset() const {
  if (impl_->kind != SetKind::LevelSetPolyhedral) wrong_kind("offset");
  return std::get<PolyData>(impl_->data).c;
}
const ProxSet& ProxSet::inner() const {
  if (impl_->kind != SetKind::LinearPreimage) wrong_kind("inner");
  return *std::get<PreimageData>(impl_->data).inner;
}
const ProxSet& ProxSet::left() const {
  if (impl_->kind != SetKind::Product) wrong_kind("left");
  return *std::get<ProductData>(impl_->data).left;
}
const ProxSet& ProxSet::right() const {
  if (impl_->kind != SetKind::Product) wrong_kind("right");
  return *std::get<ProductData>(impl_->data).right;
}

// ---------------------------------------------------------------------------

HypoReport hypomonotonicity_check(
    const ProxSet& set, const std::vector<std::pair<Vec, Vec>>& sample_points,
    const std::vector<std::pair<Vec, Vec>>& directions, double m, double tol) {
  if (sample_points.size() != directions.size()) {
    throw DimensionMismatch("hypomonotonicity_check: samples vs directions");
  }
  if (!(m > 0)) throw Error("hypomonotonicity_check: m must be positive");

  const double r = set.prox_constant();
  const double coeff = std::isinf(r) ? 0.0 : m / r;

  auto normal_at = [&](const Vec& x, const Vec& dir) -> Vec {
    Vec n = set.cone_project(x, dir).normal_part;
    double nn = n.norm();
    if (nn > m) n *= m / nn;
    return n;
  };

  HypoReport rep;
  for (size_t i = 0; i < sample_points.size(); ++i) {
    const auto& [x1, x2] = sample_points[i];
    const auto& [v1, v2] = directions[i];
    HypoSample s;
    s.x1 = x1;
    s.x2 = x2;
    s.xi1 = normal_at(x1, v1);
    s.xi2 = normal_at(x2, v2);
    s.lhs = (x1 - x2).dot(s.xi1 - s.xi2);
    s.bound = -coeff * (x1 - x2).squaredNorm();
    double slack = s.lhs - s.bound;
    rep.worst_slack = std::min(rep.worst_slack, slack);
    if (slack < -tol) rep.violations.push_back(s);
    ++rep.checked;
  }
  return rep;
}

}  // namespace proxdi
