#pragma once

// Gradient-descent steppers with Armijo backtracking, the restarted
// extrapolation driver and a damped Gauss-Newton baseline for
// min_x g(x) = ||y - f(x)||^2.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vex/extrapolate.hpp"
#include "vex/problems.hpp"

namespace vex {

enum class StepperMethod {
  GD,  ///< H = I
  PGD, ///< H = diag(J)
  SGD  ///< H = diag(J^T J)
};

std::string_view to_string(StepperMethod m);

struct StepperConfig {
  StepperMethod method = StepperMethod::PGD;
  double omega = 1e-4;
  double tau0 = 1.0;
  int max_halvings = 50;
  double diag_floor = 1e-12;

  /// Defaults per method: omega 1e-4 for GD/PGD, 0.5 for SGD.
  static StepperConfig defaults(StepperMethod m);
  /// ConfigError unless 0 < omega < 1, tau0 > 0, max_halvings >= 1.
  void validate() const;
};

struct SolveConfig {
  std::size_t q = 1;
  std::optional<ExtrapMethod> extrap; ///< nullopt runs the plain stepper
  double tol = 1e-5;
  std::size_t itermax = 500;
  ExtrapConfig extrap_config{};

  void validate() const;
};

enum class RunStatus { Converged, NonConvergence, Failed };
std::string_view to_string(RunStatus s);

enum class HistoryKind { Step, Extrap };
std::string_view to_string(HistoryKind k);

struct HistoryEntry {
  std::size_t iteration = 0;
  HistoryKind kind = HistoryKind::Step;
  double rel_successive_norm = 0.0; ///< NaN for the initial entry
  std::optional<double> relative_error;
};

struct RunReport {
  RunStatus status = RunStatus::NonConvergence;
  std::size_t iterations = 0;
  std::size_t cycles = 0;
  Vector final_x;
  std::optional<double> relative_error;
  double wall_seconds = 0.0;
  std::vector<HistoryEntry> history;
  std::string message;

  bool converged() const { return status == RunStatus::Converged; }
};

/// One accepted stepper move and the quantities entering its Armijo test.
struct StepResult {
  Vector x_next;
  double tau = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double decrease_inner = 0.0; ///< <H^{-1} ∇g, ∇g>
  double omega = 0.0;
};

/// ∇g(x) = -2 J(x)^T (y - f(x)).
Vector gradient_of_g(const NllsProblem &p, std::span<const double> x);

struct ArmijoResult {
  double tau = 0.0;
  Vector x_next;
  double objective_after = 0.0;
};

/// First τ in {τ0, τ0/2, ...} (max_halvings values) with
/// g(x + τ d) <= g(x) - ω τ inner, where g(x) = objective_before.
/// LineSearchError when none qualifies or inner < 0.
ArmijoResult armijo_search(const NllsProblem &p, std::span<const double> x,
                           std::span<const double> d, const StepperConfig &s, double inner,
                           double objective_before);

/// Same search, evaluating g(x) itself and returning only τ.
double armijo_backtrack(const NllsProblem &p, std::span<const double> x, std::span<const double> d,
                        const StepperConfig &s, double sufficient_decrease_inner);

/// The diagonal preconditioner of `method`, floored at ±diag_floor.
/// ShapeError for PGD on a non-square Jacobian.
Vector preconditioner(const NllsProblem &p, std::span<const double> x, const StepperConfig &s);

/// x + τ d with d = -H^{-1} ∇g(x).
StepResult step(const NllsProblem &p, std::span<const double> x, const StepperConfig &s);

/// ||next - prev|| / ||prev||; +inf when prev = 0 and next != prev.
double relative_change(std::span<const double> next, std::span<const double> prev);
double relative_error(std::span<const double> x, std::span<const double> x_true);

struct FixedPointWindow {
  SequenceWindow window;
  bool early_stop = false; ///< a step moved less than tol (relative)
};

/// x0 followed by up to m stepper iterates; generation stops early once a
/// step's relative change drops below tol.
FixedPointWindow fixed_point_window(const NllsProblem &p, std::span<const double> x0,
                                    std::size_t m, const StepperConfig &s, double tol = 1e-5);

using StepObserver = std::function<void(const StepResult &)>;

/// Restarted extrapolation (or the plain stepper when c.extrap is empty).
///
/// Each cycle starts from the current point, takes q+1 (RRE/MPE) or 2q (VEA)
/// stepper steps, extrapolates the window and restarts from the result.
/// The run stops when a stepper step or the extrapolated point moves less
/// than tol relative to the previous iterate, or after itermax steps.
RunReport restarted_solve(const NllsProblem &p, std::span<const double> x0,
                          const StepperConfig &s, const SolveConfig &c,
                          const StepObserver &observer = {});

/// Damped Gauss-Newton: δ minimizes ||(y - f(x)) - J(x) δ|| and the step
/// along δ is chosen by Armijo backtracking on g.
RunReport gauss_newton_solve(const NllsProblem &p, std::span<const double> x0,
                             const SolveConfig &c,
                             const StepperConfig &s = StepperConfig::defaults(StepperMethod::GD));

} // namespace vex
