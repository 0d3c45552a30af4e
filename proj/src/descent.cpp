#include "vex/descent.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "vex/errors.hpp"

namespace vex {

std::string_view to_string(StepperMethod m) {
  switch (m) {
  case StepperMethod::GD:
    return "gd";
  case StepperMethod::PGD:
    return "pgd";
  case StepperMethod::SGD:
    return "sgd";
  }
  return "?";
}

std::string_view to_string(RunStatus s) {
  switch (s) {
  case RunStatus::Converged:
    return "converged";
  case RunStatus::NonConvergence:
    return "nonconvergence";
  case RunStatus::Failed:
    return "failed";
  }
  return "?";
}

std::string_view to_string(HistoryKind k) { return k == HistoryKind::Step ? "step" : "extrap"; }

StepperConfig StepperConfig::defaults(StepperMethod m) {
  StepperConfig s;
  s.method = m;
  s.omega = m == StepperMethod::SGD ? 0.5 : 1e-4;
  return s;
}

void StepperConfig::validate() const {
  if (!(omega > 0.0 && omega < 1.0))
    throw ConfigError("stepper: omega must lie in (0, 1)");
  if (!(tau0 > 0.0))
    throw ConfigError("stepper: tau0 must be positive");
  if (max_halvings < 1)
    throw ConfigError("stepper: max_halvings must be at least 1");
  if (!(diag_floor > 0.0))
    throw ConfigError("stepper: diag_floor must be positive");
}

void SolveConfig::validate() const {
  if (extrap && q < 1)
    throw ConfigError("solve: restart length q must be at least 1");
  if (!(tol > 0.0))
    throw ConfigError("solve: tol must be positive");
}

Vector gradient_of_g(const NllsProblem &p, std::span<const double> x) {
  const Vector r = residual(p, x);
  Vector g = p.jt_apply(x, r);
  kernels::scale(-2.0, g);
  return g;
}

ArmijoResult armijo_search(const NllsProblem &p, std::span<const double> x,
                           std::span<const double> d, const StepperConfig &s, double inner,
                           double objective_before) {
  if (d.size() != x.size())
    throw DimensionError("armijo: direction and point differ in length");
  if (inner < 0.0)
    throw LineSearchError("armijo: not a descent direction (negative decrease inner product)");
  ArmijoResult out;
  out.x_next.resize(x.size());
  double tau = s.tau0;
  for (int k = 0; k < s.max_halvings; ++k, tau *= 0.5) {
    kernels::lincomb(1.0, x, tau, d, out.x_next);
    const double trial = objective(p, out.x_next);
    if (trial <= objective_before - s.omega * tau * inner) {
      out.tau = tau;
      out.objective_after = trial;
      return out;
    }
  }
  throw LineSearchError("armijo: no step in " + std::to_string(s.max_halvings) +
                        " halvings satisfies sufficient decrease");
}

double armijo_backtrack(const NllsProblem &p, std::span<const double> x, std::span<const double> d,
                        const StepperConfig &s, double sufficient_decrease_inner) {
  return armijo_search(p, x, d, s, sufficient_decrease_inner, objective(p, x)).tau;
}

Vector preconditioner(const NllsProblem &p, std::span<const double> x, const StepperConfig &s) {
  Vector h;
  switch (s.method) {
  case StepperMethod::GD:
    h.assign(x.size(), 1.0);
    return h;
  case StepperMethod::PGD:
    if (!p.square())
      throw ShapeError("PGD needs a square Jacobian; use SGD for " + p.name());
    h = p.jacobian_diag(x);
    break;
  case StepperMethod::SGD:
    h = p.jtj_diag(x);
    break;
  }
  const double floor = s.diag_floor;
  kernels::parallel_for(h.size(), [&](std::size_t i) {
    if (!(std::abs(h[i]) >= floor))
      h[i] = h[i] < 0.0 ? -floor : floor;
  });
  return h;
}

StepResult step(const NllsProblem &p, std::span<const double> x, const StepperConfig &s) {
  if (x.size() != p.n_unknowns())
    throw DimensionError("step: x has the wrong length");
  const Vector h = preconditioner(p, x, s);
  const Vector r = residual(p, x);
  const double g_x = kernels::dot(r, r);
  Vector grad = p.jt_apply(x, r);
  kernels::scale(-2.0, grad);

  Vector d(x.size());
  kernels::parallel_for(d.size(), [&](std::size_t i) { d[i] = -grad[i] / h[i]; });
  const double inner = -kernels::dot(d, grad);

  ArmijoResult a = armijo_search(p, x, d, s, inner, g_x);
  StepResult out;
  out.x_next = std::move(a.x_next);
  out.tau = a.tau;
  out.objective_before = g_x;
  out.objective_after = a.objective_after;
  out.decrease_inner = inner;
  out.omega = s.omega;
  return out;
}

double relative_change(std::span<const double> next, std::span<const double> prev) {
  const double diff = kernels::distance(next, prev);
  const double base = kernels::norm2(prev);
  if (base == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / base;
}

double relative_error(std::span<const double> x, std::span<const double> x_true) {
  return kernels::distance(x, x_true) / kernels::norm2(x_true);
}

FixedPointWindow fixed_point_window(const NllsProblem &p, std::span<const double> x0,
                                    std::size_t m, const StepperConfig &s, double tol) {
  if (m < 1)
    throw ConfigError("fixed_point_window: need at least one step");
  FixedPointWindow out;
  out.window.push_back(Vector(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < m; ++i) {
    StepResult st = step(p, out.window.back(), s);
    const double rel = relative_change(st.x_next, out.window.back());
    out.window.push_back(std::move(st.x_next));
    if (rel < tol) {
      out.early_stop = true;
      break;
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// Report bookkeeping shared by the drivers: history, iteration count and the
// lowest-objective iterate seen so far.
class RunRecorder {
public:
  RunRecorder(const NllsProblem &p, std::span<const double> x0)
      : problem_(p), start_(Clock::now()), best_x_(x0.begin(), x0.end()),
        best_g_(objective(p, x0)) {
    report_.history.push_back(
        {0, HistoryKind::Step, std::numeric_limits<double>::quiet_NaN(), error_of(x0)});
  }

  RunReport &report() { return report_; }
  const Vector &best() const { return best_x_; }

  void offer(std::span<const double> x, double g) {
    if (g < best_g_) {
      best_g_ = g;
      best_x_.assign(x.begin(), x.end());
    }
  }

  void record(HistoryKind kind, double rel, std::span<const double> x) {
    report_.history.push_back({report_.iterations, kind, rel, error_of(x)});
  }

  RunReport finish(RunStatus status, Vector final_x, std::string message = {}) {
    report_.status = status;
    report_.final_x = std::move(final_x);
    report_.relative_error = error_of(report_.final_x);
    report_.message = std::move(message);
    report_.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(report_);
  }

  // Unconverged and failed runs end at the best-objective iterate.
  RunReport give_up(std::string message, RunStatus status = RunStatus::NonConvergence) {
    Vector best = best_x_;
    return finish(status, std::move(best), std::move(message));
  }

private:
  std::optional<double> error_of(std::span<const double> x) const {
    if (!problem_.x_true())
      return std::nullopt;
    return relative_error(x, *problem_.x_true());
  }

  const NllsProblem &problem_;
  Clock::time_point start_;
  RunReport report_;
  Vector best_x_;
  double best_g_;
};

} // namespace

RunReport restarted_solve(const NllsProblem &p, std::span<const double> x0,
                          const StepperConfig &s, const SolveConfig &c,
                          const StepObserver &observer) {
  s.validate();
  c.validate();
  if (x0.size() != p.n_unknowns())
    throw DimensionError("restarted_solve: x0 has the wrong length");
  // Fail fast on shape errors instead of inside the first cycle.
  if (s.method == StepperMethod::PGD && !p.square())
    throw ShapeError("PGD needs a square Jacobian; use SGD for " + p.name());

  RunRecorder rec(p, x0);
  RunReport &rep = rec.report();
  StepperConfig active = s;
  int line_search_failures = 0;
  Vector x(x0.begin(), x0.end());

  const std::size_t steps_per_cycle =
      c.extrap ? window_size(*c.extrap, c.q) - 1 : std::numeric_limits<std::size_t>::max();

  while (rep.iterations < c.itermax) {
    SequenceWindow window;
    window.push_back(x);
    bool aborted = false;
    for (std::size_t i = 0; i < steps_per_cycle && rep.iterations < c.itermax; ++i) {
      StepResult st;
      try {
        st = step(p, window.back(), active);
      } catch (const LineSearchError &e) {
        if (++line_search_failures >= 2)
          return rec.give_up(e.what(), RunStatus::Failed);
        active.tau0 *= 0.1;
        aborted = true;
        break;
      }
      if (observer)
        observer(st);
      ++rep.iterations;
      const double rel = relative_change(st.x_next, window.back());
      rec.offer(st.x_next, st.objective_after);
      rec.record(HistoryKind::Step, rel, st.x_next);
      window.push_back(std::move(st.x_next));
      if (rel < c.tol)
        return rec.finish(RunStatus::Converged, window.back());
    }
    if (aborted) {
      x = rec.best();
      continue;
    }
    if (!c.extrap || window.size() < window_size(*c.extrap, c.q)) {
      x = window.back();
      continue;
    }

    Vector t;
    try {
      t = extrapolate(*c.extrap, window, c.extrap_config).t;
    } catch (const DegenerateError &) {
      t = window.back();
    } catch (const SingularError &) {
      t = window.back();
    }
    ++rep.cycles;
    const double rel = relative_change(t, window.back());
    rec.offer(t, objective(p, t));
    rec.record(HistoryKind::Extrap, rel, t);
    if (rel < c.tol)
      return rec.finish(RunStatus::Converged, std::move(t));
    x = std::move(t);
  }
  return rec.give_up("iteration budget exhausted");
}

RunReport gauss_newton_solve(const NllsProblem &p, std::span<const double> x0,
                             const SolveConfig &c, const StepperConfig &s) {
  s.validate();
  c.validate();
  if (x0.size() != p.n_unknowns())
    throw DimensionError("gauss_newton_solve: x0 has the wrong length");
  constexpr std::size_t kDenseLimit = 4096;

  RunRecorder rec(p, x0);
  RunReport &rep = rec.report();
  Vector x(x0.begin(), x0.end());
  while (rep.iterations < c.itermax) {
    const Vector r = residual(p, x);
    const double g_x = kernels::dot(r, r);
    Vector delta;
    if (p.n_unknowns() <= kDenseLimit) {
      delta = householder_least_squares(p.jacobian_dense(x), r, 1e-12);
    } else if (auto structured = p.structured_least_squares_step(x, r)) {
      delta = std::move(*structured);
    } else {
      throw ConfigError("gauss-newton: " + p.name() + " is too large for a dense Jacobian");
    }
    Vector grad = p.jt_apply(x, r);
    kernels::scale(-2.0, grad);
    const double inner = -kernels::dot(grad, delta);

    ArmijoResult a;
    try {
      a = armijo_search(p, x, delta, s, inner, g_x);
    } catch (const LineSearchError &e) {
      return rec.give_up(e.what(), RunStatus::Failed);
    }
    ++rep.iterations;
    const double rel = relative_change(a.x_next, x);
    rec.offer(a.x_next, a.objective_after);
    rec.record(HistoryKind::Step, rel, a.x_next);
    x = std::move(a.x_next);
    if (rel < c.tol)
      return rec.finish(RunStatus::Converged, std::move(x));
  }
  return rec.give_up("iteration budget exhausted");
}

} // namespace vex
