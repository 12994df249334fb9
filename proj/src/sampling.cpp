#include "proxdi/sampling.hpp"

#include <cmath>

namespace proxdi {

Vec random_in_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(lo.size());
  for (int i = 0; i < lo.size(); ++i) x[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
  return x;
}

Vec random_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  double n = 0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = g(rng);
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

std::vector<Vec> sample_set(const ProxSet& set, const SamplerSpec& spec) {
  auto window = spec.window ? *spec.window : set.bounding_box();
  const Vec& lo = window.first;
  const Vec& hi = window.second;
  const int d = set.dim();
  std::vector<Vec> out;

  auto admit = [&](const Vec& p) {
    if (set.member(p, 0.0)) {
      out.push_back(p);
      return;
    }
    try {
      out.push_back(set.project(p));
    } catch (const TubeViolation&) {
    }
  };

  bool grid = spec.mode == SamplerSpec::Mode::Grid && d <= 3;
  if (grid) {
    double extent = (hi - lo).maxCoeff();
    double step = std::max(spec.density * extent, 1e-12);
    std::vector<int> counts(d);
    long total = 1;
    for (int i = 0; i < d; ++i) {
      counts[i] = std::max(1, static_cast<int>(std::floor((hi[i] - lo[i]) / step)) + 1);
      total *= counts[i];
      if (total > 2'000'000) throw Error("grid sampler too dense; use random mode");
    }
    std::vector<int> idx(d, 0);
    Vec p(d);
    while (true) {
      for (int i = 0; i < d; ++i) p[i] = lo[i] + (idx[i] + 0.5) * step;
      bool inside_window = true;
      for (int i = 0; i < d; ++i) {
        if (p[i] > hi[i]) inside_window = false;
      }
      if (inside_window) admit(p);
      int k = 0;
      while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
      if (k == d) break;
    }
  } else {
    std::mt19937_64 rng(spec.seed);
    for (int i = 0; i < spec.count; ++i) admit(random_in_box(rng, lo, hi));
  }
  return out;
}

std::vector<Vec> sample_boundary(const ProxSet& set, int count,
                                 std::uint64_t seed,
                                 std::optional<std::pair<Vec, Vec>> window) {
  auto box = window ? *window : set.bounding_box();
  // Pad the window so exterior points exist even for box-like sets.
  Vec span = box.second - box.first;
  double pad = 0.25 * std::max(span.maxCoeff(), 1.0);
  Vec lo = box.first.array() - pad;
  Vec hi = box.second.array() + pad;

  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  int tries = 0;
  const int max_tries = 200 * count + 1000;
  while (static_cast<int>(out.size()) < count && tries++ < max_tries) {
    Vec q = random_in_box(rng, lo, hi);
    if (set.member(q, 0.0)) continue;
    try {
      out.push_back(set.project(q));
    } catch (const TubeViolation&) {
    }
  }
  return out;
}

}  // namespace proxdi
