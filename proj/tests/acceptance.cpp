// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "oracles.hpp"
#include "vex/bench.hpp"
#include "vex/descent.hpp"
#include "vex/errors.hpp"

using namespace vex;
namespace vb = vex::bench;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &why) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + why;
    }
  }
  void note(const std::string &s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Verdict extrapolation_exactness() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(4, 12);
  std::uniform_real_distribution<double> radius(0.3, 0.95);
  double worst[3] = {0, 0, 0};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = dim(gen);
    const oracle::Mat m = oracle::random_with_radius(n, radius(gen), gen);
    const oracle::Vec b = oracle::random_vec(n, gen);
    const oracle::Vec s0 = oracle::random_vec(n, gen);
    const oracle::Vec limit = oracle::fixed_point(m, b);
    const auto q = static_cast<std::size_t>(n);
    int k = 0;
    for (auto method : {ExtrapMethod::RRE, ExtrapMethod::MPE, ExtrapMethod::VEA}) {
      const auto w = oracle::linear_sequence(m, b, s0, window_size(method, q));
      double err = 0.0;
      try {
        err = oracle::rel_err(oracle::to_eigen(extrapolate(method, w).t), limit);
      } catch (const Error &e) {
        err = INFINITY;
        v.note(std::string(to_string(method)) + " threw: " + e.what());
      }
      worst[k] = std::max(worst[k], err);
      ++k;
    }
  }
  const double elapsed = seconds_since(t0);
  v.require(worst[0] <= 1e-7, "RRE error " + sci(worst[0]));
  v.require(worst[1] <= 1e-7, "MPE error " + sci(worst[1]));
  v.require(worst[2] <= 1e-7, "VEA error " + sci(worst[2]));
  v.require(elapsed < 1.0, "took " + sci(elapsed) + " s");
  v.note("worst rel err RRE " + sci(worst[0]) + ", MPE " + sci(worst[1]) + ", VEA " +
         sci(worst[2]) + " over 20 sequences in " + sci(elapsed) + " s");
  return v;
}

Verdict coefficient_normalization() {
  Verdict v;
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> dim(2, 40), order(1, 8);
  double worst_sum = 0.0;
  std::size_t recurrence_violations = 0, breakdowns = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(gen);
    const int q = order(gen);
    SequenceWindow w;
    // Half the windows are random, half come from contractive linear maps.
    if (trial % 2 == 0) {
      for (int k = 0; k < q + 2; ++k)
        w.push_back(oracle::to_vector(oracle::random_vec(n, gen)));
    } else {
      const oracle::Mat m = oracle::random_with_radius(n, 0.9, gen);
      w = oracle::linear_sequence(m, oracle::random_vec(n, gen), oracle::random_vec(n, gen),
                                  static_cast<std::size_t>(q + 2));
    }
    const auto method = trial % 4 < 2 ? ExtrapMethod::RRE : ExtrapMethod::MPE;
    const auto out = extrapolate(method, w);
    breakdowns += out.breakdown;
    double sum = 0.0;
    for (double g : out.gamma)
      sum += g;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    if (out.alpha.size() + 1 != out.gamma.size()) {
      ++recurrence_violations;
      continue;
    }
    double a = 0.0;
    for (std::size_t j = 0; j < out.alpha.size(); ++j) {
      a = (j == 0 ? 1.0 : out.alpha[j - 1]) - out.gamma[j];
      if (out.alpha[j] != a)
        ++recurrence_violations;
    }
  }
  v.require(worst_sum <= 1e-12, "max |Σγ - 1| = " + sci(worst_sum));
  v.require(recurrence_violations == 0,
            std::to_string(recurrence_violations) + " α-recurrence violations");
  v.note("max |Σγ - 1| = " + sci(worst_sum) + " over 200 windows (" + std::to_string(breakdowns) +
         " breakdowns)");
  return v;
}

double gradient_discrepancy(const NllsProblem &p, const Vector &x) {
  const Vector grad = gradient_of_g(p, x);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    Vector plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (objective(p, plus) - objective(p, minus)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - grad[i]));
    scale = std::max(scale, std::abs(grad[i]));
  }
  return worst / scale;
}

Verdict gradient_fidelity() {
  Verdict v;
  std::mt19937_64 gen(5);
  const auto bratu = build_bratu({8, 1.0, 10.0});
  const auto sparse = build_sparse_sine(50);
  double worst_b = 0.0, worst_s = 0.0;
  for (int k = 0; k < 10; ++k) {
    worst_b = std::max(worst_b, gradient_discrepancy(bratu, oracle::to_vector(oracle::random_vec(64, gen))));
    worst_s = std::max(worst_s, gradient_discrepancy(sparse, oracle::to_vector(oracle::random_vec(50, gen))));
  }
  v.require(worst_b <= 1e-6, "bratu " + sci(worst_b));
  v.require(worst_s <= 1e-6, "sparse " + sci(worst_s));
  v.note("max relative FD discrepancy bratu " + sci(worst_b) + ", sparse " + sci(worst_s));
  return v;
}

Verdict armijo_contract() {
  Verdict v;
  std::size_t checked = 0, violations = 0, increases = 0;

  // Literal check: recompute g, ∇g and H independently of the step's own
  // bookkeeping and test g(x + τd) <= g(x) - ωτ <H^{-1}∇g, ∇g>.
  struct Case {
    std::shared_ptr<NllsProblem> p;
    StepperMethod m;
  };
  const std::vector<Case> cases{
      {std::make_shared<BratuProblem>(build_bratu({20, 1.0, 10.0})), StepperMethod::PGD},
      {std::make_shared<BratuProblem>(build_bratu({20, 0.0, 1e4})), StepperMethod::SGD},
      {std::make_shared<BratuProblem>(build_bratu({20, 2.0, 8.0})), StepperMethod::GD},
      {std::make_shared<SparseSineProblem>(build_sparse_sine(500)), StepperMethod::SGD},
  };
  for (const auto &c : cases) {
    const auto s = StepperConfig::defaults(c.m);
    Vector x = vb::initial_guess(vb::StartKind::Unit, c.p->n_unknowns(), 0);
    for (int k = 0; k < 40; ++k) {
      const double g = objective(*c.p, x);
      const Vector grad = gradient_of_g(*c.p, x);
      const Vector h = preconditioner(*c.p, x, s);
      double inner = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        inner += grad[i] / h[i] * grad[i];
      const auto st = step(*c.p, x, s);
      const double g_next = objective(*c.p, st.x_next);
      ++checked;
      if (!(g_next <= g - s.omega * st.tau * inner * (1.0 - 1e-12)))
        ++violations;
      x = st.x_next;
    }
  }

  // Monotone objective along every accepted step of complete runs.
  auto watch = [&](const StepResult &st) {
    ++checked;
    if (!(st.objective_after <= st.objective_before - st.omega * st.tau * st.decrease_inner))
      ++violations;
    if (st.objective_after > st.objective_before)
      ++increases;
  };
  for (const auto &c : cases) {
    for (auto m : {ExtrapMethod::RRE, ExtrapMethod::MPE, ExtrapMethod::VEA}) {
      SolveConfig sc;
      sc.extrap = m;
      sc.q = 3;
      sc.itermax = 200;
      restarted_solve(*c.p, vb::initial_guess(vb::StartKind::Unit, c.p->n_unknowns(), 0),
                      StepperConfig::defaults(c.m), sc, watch);
    }
  }
  v.require(violations == 0, std::to_string(violations) + " Armijo violations");
  v.require(increases == 0, std::to_string(increases) + " objective increases");
  v.note(std::to_string(checked) + " accepted steps checked");
  return v;
}

vb::ExperimentSpec bratu_spec(double alpha, double lambda, vb::SolverKind st,
                              std::optional<ExtrapMethod> m, std::size_t q) {
  vb::ExperimentSpec s;
  s.n = 100;
  s.alpha = alpha;
  s.lambda = lambda;
  s.stepper = st;
  s.extrap = m;
  s.q = m ? q : 0;
  return s;
}

std::string describe(const vb::ExperimentResult &r) {
  return r.row.extrap + "(" + std::to_string(r.row.q) + ")-" + r.row.stepper + " " +
         r.row.status + " iters " + std::to_string(r.row.iterations) + " RE " +
         sci(r.row.relative_error.value_or(NAN)) + " " + sci(r.row.wall_seconds) + " s";
}

Verdict table2_envelope() {
  Verdict v;
  for (double lambda : {1e4, 1e6}) {
    const double re_max = lambda == 1e4 ? 1e-8 : 1e-10;
    for (auto m : {ExtrapMethod::RRE, ExtrapMethod::MPE}) {
      const auto t0 = Clock::now();
      const auto r = vb::run_experiment(bratu_spec(0.0, lambda, vb::SolverKind::SGD, m, 2));
      const double elapsed = seconds_since(t0);
      const std::string tag = "λ=" + sci(lambda) + " " + describe(r);
      v.require(r.report.converged(), tag + " did not converge");
      v.require(r.row.iterations <= 20, tag + " exceeds 20 iterations");
      v.require(r.row.relative_error && *r.row.relative_error <= re_max,
                tag + " RE above " + sci(re_max));
      v.require(elapsed < 10.0, tag + " slower than 10 s");
      v.note(tag);
    }
  }
  return v;
}

Verdict table1_envelope() {
  Verdict v;
  for (auto m : {ExtrapMethod::RRE, ExtrapMethod::MPE}) {
    const auto t0 = Clock::now();
    const auto r = vb::run_experiment(bratu_spec(1.0, 10.0, vb::SolverKind::PGD, m, 6));
    const double elapsed = seconds_since(t0);
    auto plain_spec = bratu_spec(1.0, 10.0, vb::SolverKind::PGD, std::nullopt, 0);
    plain_spec.itermax = r.row.iterations;
    const auto plain = vb::run_experiment(plain_spec);
    const std::string tag = describe(r);
    v.require(r.report.converged(), tag + " did not converge");
    v.require(r.row.iterations <= 35, tag + " exceeds 35 iterations");
    v.require(r.row.relative_error && *r.row.relative_error <= 1e-5, tag + " RE above 1e-5");
    v.require(r.row.relative_error && plain.row.relative_error &&
                  *r.row.relative_error < *plain.row.relative_error,
              tag + " not better than plain PGD");
    v.require(elapsed < 10.0, tag + " slower than 10 s");
    v.note(tag + " vs plain PGD RE " + sci(plain.row.relative_error.value_or(NAN)) + " at " +
           std::to_string(plain.row.iterations) + " iters");
  }
  return v;
}

Verdict table3_envelope() {
  Verdict v;
  vb::ExperimentSpec rre;
  rre.problem = vb::ProblemKind::Sparse;
  rre.n = 1000;
  rre.stepper = vb::SolverKind::SGD;
  rre.extrap = ExtrapMethod::RRE;
  rre.q = 1;
  vb::ExperimentSpec gn = rre;
  gn.stepper = vb::SolverKind::GN;
  gn.extrap.reset();
  gn.q = 0;

  const auto t0 = Clock::now();
  const auto a = vb::run_experiment(rre);
  const auto b = vb::run_experiment(gn);
  const double elapsed = seconds_since(t0);
  const double re_a = a.row.relative_error.value_or(INFINITY);
  const double re_b = b.row.relative_error.value_or(NAN);
  v.require(re_a <= 1e-3, "RRE(1)-SGD RE " + sci(re_a));
  v.require(a.row.iterations <= 25, "RRE(1)-SGD took " + std::to_string(a.row.iterations));
  v.require(b.row.iterations == 5, "GN stopped at " + std::to_string(b.row.iterations));
  v.require(re_b >= 1e-2 && re_b <= 3e-1, "GN RE " + sci(re_b) + " outside [1e-2, 3e-1]");
  v.require(re_a < re_b, "RRE(1)-SGD not better than GN");
  v.require(elapsed < 5.0, "took " + sci(elapsed) + " s");
  v.note(describe(a) + "; gn " + b.row.status + " iters " + std::to_string(b.row.iterations) +
         " RE " + sci(re_b));
  return v;
}

Verdict vea_scalar() {
  Verdict v;
  const double s0 = 3.0, s1 = 2.0, s2 = 1.5;
  const double aitken = s0 - (s1 - s0) * (s1 - s0) / (s2 - 2.0 * s1 + s0);
  const auto out = vea(SequenceWindow({Vector{s0}, Vector{s1}, Vector{s2}}));
  const double err = std::abs(out.t[0] - aitken);
  v.require(err <= 1e-14 && std::abs(out.t[0] - 1.0) <= 1e-14, "ε2 = " + sci(out.t[0]));
  v.note("ε2 - Aitken = " + sci(err));
  return v;
}

Verdict matrix_free_fidelity() {
  Verdict v;
  std::mt19937_64 gen(99);
  double worst = 0.0;
  for (std::size_t n = 3; n <= 8; ++n) {
    for (auto [alpha, lambda] : {std::pair{0.0, 1.0}, std::pair{1.0, 10.0}, std::pair{4.0, 1e3}}) {
      const auto p = build_bratu({n, alpha, lambda});
      const auto N = static_cast<Eigen::Index>(n * n);
      const oracle::Vec x = oracle::random_vec(N, gen), r = oracle::random_vec(N, gen);
      const oracle::Mat j = oracle::bratu_jacobian(static_cast<Eigen::Index>(n), alpha, lambda, x);
      const oracle::Vec f =
          oracle::bratu_linear(static_cast<Eigen::Index>(n), alpha) * x +
          lambda * x.array().exp().matrix();
      const Vector xv = oracle::to_vector(x), rv = oracle::to_vector(r);
      auto rel = [](std::span<const double> got, const oracle::Vec &ref) {
        return oracle::max_abs_diff(got, ref) / std::max(1.0, ref.cwiseAbs().maxCoeff());
      };
      worst = std::max(worst, rel(p.eval(xv), f));
      worst = std::max(worst, rel(p.jt_apply(xv, rv), j.transpose() * r));
      worst = std::max(worst, rel(p.jtj_diag(xv), (j.transpose() * j).diagonal()));
    }
  }
  v.require(worst <= 1e-12, "max discrepancy " + sci(worst));
  v.note("max relative discrepancy " + sci(worst) + " for n = 3..8");
  return v;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "vex_acceptance";
  std::filesystem::create_directories(dir);
  std::vector<vb::ReportRow> rows;
  std::string histories[2];
  for (int k = 0; k < 2; ++k) {
    const auto report = dir / ("run" + std::to_string(k) + ".csv");
    const auto history = dir / ("hist" + std::to_string(k) + ".csv");
    const std::string cmd = std::string(VEX_BENCH_EXE) +
                            " run --problem bratu --n 100 --alpha 1 --lambda 10 --stepper pgd"
                            " --extrap rre --q 6 --out " +
                            report.string() + " --history " + history.string();
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      v.require(false, "bench run failed");
      return v;
    }
    std::ifstream in(report);
    auto parsed = vb::read_report(in);
    if (parsed.size() != 1) {
      v.require(false, "unexpected report size");
      return v;
    }
    parsed[0].wall_seconds = 0.0;
    rows.push_back(parsed[0]);
    histories[k] = slurp(history);
  }
  v.require(rows[0] == rows[1], "report rows differ");
  v.require(histories[0] == histories[1], "histories differ");
  v.note("two runs: identical non-timing fields and " +
         std::to_string(std::count(histories[0].begin(), histories[0].end(), '\n') - 1) +
         " identical history rows");
  return v;
}

} // namespace

int main() {
  const std::pair<const char *, std::function<Verdict()>> criteria[] = {
      {"extrapolation exactness", extrapolation_exactness},
      {"coefficient normalization", coefficient_normalization},
      {"gradient fidelity", gradient_fidelity},
      {"Armijo contract", armijo_contract},
      {"standard Bratu envelope (λ = 1e4, 1e6)", table2_envelope},
      {"extended Bratu envelope (α = 1, λ = 10)", table1_envelope},
      {"sparse sine envelope (n = 1000)", table3_envelope},
      {"VEA scalar exactness", vea_scalar},
      {"matrix-free fidelity", matrix_free_fidelity},
      {"determinism of bench run", determinism},
  };
  int failures = 0, index = 0;
  for (const auto &[name, check] : criteria) {
    ++index;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception &e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.pass;
    std::printf("criterion %2d [%s] %s: %s\n", index, v.pass ? "PASS" : "FAIL", name,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
