#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxdi/geometry.hpp"
#include "proxdi/lyapunov.hpp"
#include "proxdi/monotone.hpp"
#include "proxdi/observer.hpp"
#include "proxdi/sampling.hpp"
#include "proxdi/solver.hpp"

namespace proxdi {

enum class TaskKind {
  Simulate,
  Certify,
  Invariance,
  Observe,
  Equivalence,
  Convergence,
  Lure,
};

struct ObserverBlock {
  LipMap L, G;
  double delta = 1.0;
  double epsilon = 0.5;
  double eta = 0.0;
  std::optional<double> m, M;
  Vec z0;
};

struct LureBlock {
  Mat A, B, D, P;
  double delta = 1.0;
  ProxSet S;
  Vec x0;
};

struct Scenario {
  std::string name;
  int dim = 0;
  std::uint64_t seed = 42;
  std::optional<ProxSet> set;
  std::optional<VectorField> field;
  Vec initial;
  IntegratorConfig cfg;
  TaskKind task = TaskKind::Simulate;

  std::optional<LyapunovCandidate> candidate;
  std::optional<ProxSet> subset;
  std::optional<ObserverBlock> observer;
  std::optional<LureBlock> lure;
  std::vector<double> h_list;
  SamplerSpec sampler;
};

struct CheckLine {
  std::string name;
  bool pass = false;
  double margin = 0.0;
};

struct RunResult {
  std::vector<CheckLine> checks;
  int exit_code = 0;  // 0 all pass, 2 violated checks, 1 hard errors
  std::string error;
};

/// Builtin vector fields by name. Supported: rotation, negate, zero,
/// constant (params = the vector), spiral (param gamma), radial_well
/// (param: target radius; requires an explicit kappa), affine (A, b).
VectorField make_builtin_field(const std::string& name,
                               const std::vector<double>& params, int dim,
                               std::optional<double> kappa_override = {});

VectorField make_affine_field(const Mat& A, const Vec& b,
                              std::optional<double> kappa_override = {});

/// Parses and fully validates a scenario file. Throws ParseError with the
/// offending line or ValidationError naming the field.
Scenario parse_scenario(const std::string& path);

/// Runs the scenario's task, writes CSV artifacts and report.txt under
/// out_dir, and returns the per-check outcome.
RunResult run_scenario(const Scenario& scn, const std::string& out_dir);

}  // namespace proxdi
