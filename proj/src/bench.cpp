#include "vex/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "vex/errors.hpp"

namespace vex::bench {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view field, std::string_view what) {
  const std::string s(field);
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("cannot parse " + std::string(what) + " from '" + s + "'");
  return v;
}

std::uint64_t parse_unsigned(std::string_view field, std::string_view what) {
  const std::string s(field);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    // Allow integral values in floating notation such as 1e6.
    const double v = parse_double(field, what);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
      throw ConfigError("cannot parse " + std::string(what) + " from '" + s + "'");
    return static_cast<std::uint64_t>(v);
  }
  return std::stoull(s);
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  return line;
}

StepperMethod as_stepper(SolverKind k) {
  switch (k) {
  case SolverKind::GD:
    return StepperMethod::GD;
  case SolverKind::PGD:
    return StepperMethod::PGD;
  case SolverKind::SGD:
    return StepperMethod::SGD;
  case SolverKind::GN:
    break;
  }
  return StepperMethod::GD;
}

std::unique_ptr<NllsProblem> make_problem(const ExperimentSpec &spec) {
  if (spec.problem == ProblemKind::Bratu)
    return std::make_unique<BratuProblem>(build_bratu({spec.n, spec.alpha, spec.lambda}));
  return std::make_unique<SparseSineProblem>(build_sparse_sine(spec.n));
}

ReportRow base_row(const ExperimentSpec &spec) {
  ReportRow row;
  row.problem = std::string(to_string(spec.problem));
  row.n = spec.n;
  row.alpha = spec.alpha;
  row.lambda = spec.lambda;
  row.stepper = std::string(to_string(spec.stepper));
  row.extrap = spec.extrap ? std::string(to_string(*spec.extrap)) : "none";
  row.q = spec.extrap ? spec.q : 0;
  return row;
}

void write_file(const std::string &path, const std::vector<HistoryEntry> &history) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open history file '" + path + "' for writing");
  write_history(out, history);
  if (!out)
    throw IoError("failed writing history file '" + path + "'");
}

} // namespace

std::string_view to_string(ProblemKind k) { return k == ProblemKind::Bratu ? "bratu" : "sparse"; }

std::string_view to_string(SolverKind k) {
  switch (k) {
  case SolverKind::GD:
    return "gd";
  case SolverKind::PGD:
    return "pgd";
  case SolverKind::SGD:
    return "sgd";
  case SolverKind::GN:
    return "gn";
  }
  return "?";
}

std::string_view to_string(StartKind k) {
  switch (k) {
  case StartKind::Unit:
    return "unit";
  case StartKind::Zero:
    return "zero";
  case StartKind::Random:
    return "random";
  }
  return "?";
}

ProblemKind parse_problem(std::string_view s) {
  const std::string v = lower(s);
  if (v == "bratu")
    return ProblemKind::Bratu;
  if (v == "sparse")
    return ProblemKind::Sparse;
  throw ConfigError("unknown problem '" + std::string(s) + "' (expected bratu or sparse)");
}

SolverKind parse_solver(std::string_view s) {
  const std::string v = lower(s);
  if (v == "gd")
    return SolverKind::GD;
  if (v == "pgd")
    return SolverKind::PGD;
  if (v == "sgd")
    return SolverKind::SGD;
  if (v == "gn")
    return SolverKind::GN;
  throw ConfigError("unknown stepper '" + std::string(s) + "' (expected gd, pgd, sgd or gn)");
}

StartKind parse_start(std::string_view s) {
  const std::string v = lower(s);
  if (v == "unit")
    return StartKind::Unit;
  if (v == "zero")
    return StartKind::Zero;
  if (v == "random")
    return StartKind::Random;
  throw ConfigError("unknown x0 '" + std::string(s) + "' (expected unit, zero or random)");
}

std::optional<ExtrapMethod> parse_extrap(std::string_view s) {
  const std::string v = lower(s);
  if (v == "none" || v.empty())
    return std::nullopt;
  if (v == "rre")
    return ExtrapMethod::RRE;
  if (v == "mpe")
    return ExtrapMethod::MPE;
  if (v == "vea")
    return ExtrapMethod::VEA;
  throw ConfigError("unknown extrapolation '" + std::string(s) + "' (expected rre, mpe or vea)");
}

void ExperimentSpec::validate() const {
  if (problem == ProblemKind::Bratu && n < 3)
    throw ConfigError("bratu needs n >= 3");
  if (problem == ProblemKind::Sparse && n < 2)
    throw ConfigError("sparse needs n >= 2");
  if (problem == ProblemKind::Sparse && stepper == SolverKind::PGD)
    throw ConfigError("PGD needs a square Jacobian; the sparse problem requires sgd, gd or gn");
  if (stepper == SolverKind::GN && extrap)
    throw ConfigError("gn cannot be combined with extrapolation");
  if (extrap && q < 1)
    throw ConfigError("extrapolation needs q >= 1");
  if (!(tol > 0.0))
    throw ConfigError("tol must be positive");
  if (!(tau0 > 0.0))
    throw ConfigError("tau0 must be positive");
  if (!std::isfinite(alpha) || !std::isfinite(lambda))
    throw ConfigError("alpha and lambda must be finite");
}

std::string format_row(const ReportRow &r) {
  std::string s;
  s += r.problem + ',' + std::to_string(r.n) + ',' + format_double(r.alpha) + ',' +
       format_double(r.lambda) + ',' + r.stepper + ',' + r.extrap + ',' + std::to_string(r.q) +
       ',' + r.status + ',' + std::to_string(r.iterations) + ',' + std::to_string(r.cycles) + ',';
  if (r.relative_error)
    s += format_double(*r.relative_error);
  s += ',' + format_double(r.wall_seconds);
  return s;
}

ReportRow parse_row(std::string_view line) {
  const auto f = split_csv(line);
  if (f.size() != 12)
    throw ConfigError("report row has " + std::to_string(f.size()) + " fields, expected 12");
  ReportRow r;
  r.problem = f[0];
  r.n = parse_unsigned(f[1], "n");
  r.alpha = parse_double(f[2], "alpha");
  r.lambda = parse_double(f[3], "lambda");
  r.stepper = f[4];
  r.extrap = f[5];
  r.q = parse_unsigned(f[6], "q");
  r.status = f[7];
  r.iterations = parse_unsigned(f[8], "iterations");
  r.cycles = parse_unsigned(f[9], "cycles");
  if (!f[10].empty())
    r.relative_error = parse_double(f[10], "relative_error");
  r.wall_seconds = parse_double(f[11], "wall_seconds");
  return r;
}

void write_report(std::ostream &out, const std::vector<ReportRow> &rows) {
  out << kReportHeader << '\n';
  for (const auto &r : rows)
    out << format_row(r) << '\n';
}

std::vector<ReportRow> read_report(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kReportHeader)
    throw ConfigError("report is missing the expected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (!line.empty())
      rows.push_back(parse_row(line));
  }
  return rows;
}

void write_history(std::ostream &out, const std::vector<HistoryEntry> &history) {
  out << kHistoryHeader << '\n';
  for (const auto &h : history) {
    out << h.iteration << ',' << to_string(h.kind) << ',' << format_double(h.rel_successive_norm)
        << ',';
    if (h.relative_error)
      out << format_double(*h.relative_error);
    out << '\n';
  }
}

std::vector<HistoryEntry> read_history(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kHistoryHeader)
    throw ConfigError("history is missing the expected header");
  std::vector<HistoryEntry> out;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty())
      continue;
    const auto f = split_csv(line);
    if (f.size() != 4)
      throw ConfigError("history row needs 4 fields");
    HistoryEntry h;
    h.iteration = parse_unsigned(f[0], "iteration");
    if (f[1] == "step")
      h.kind = HistoryKind::Step;
    else if (f[1] == "extrap")
      h.kind = HistoryKind::Extrap;
    else
      throw ConfigError("unknown history kind '" + f[1] + "'");
    h.rel_successive_norm = parse_double(f[2], "rel_successive_norm");
    if (!f[3].empty())
      h.relative_error = parse_double(f[3], "relative_error");
    out.push_back(h);
  }
  return out;
}

Vector initial_guess(StartKind kind, std::size_t n, std::uint64_t seed) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  switch (kind) {
  case StartKind::Unit:
    return Vector(n, scale);
  case StartKind::Zero:
    return Vector(n, 0.0);
  case StartKind::Random: {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(n);
    for (auto &v : x)
      v = u(gen) * scale;
    return x;
  }
  }
  return Vector(n, scale);
}

ExperimentResult run_experiment(const ExperimentSpec &spec) {
  spec.validate();
  const auto problem = make_problem(spec);
  const Vector x0 = initial_guess(spec.x0, problem->n_unknowns(), spec.seed);

  SolveConfig c;
  c.extrap = spec.extrap;
  c.q = spec.extrap ? spec.q : 1;
  c.tol = spec.tol;
  c.itermax = spec.itermax;

  ExperimentResult res;
  try {
    if (spec.stepper == SolverKind::GN) {
      StepperConfig s = StepperConfig::defaults(StepperMethod::GD);
      s.tau0 = spec.tau0;
      res.report = gauss_newton_solve(*problem, x0, c, s);
    } else {
      StepperConfig s = StepperConfig::defaults(as_stepper(spec.stepper));
      s.tau0 = spec.tau0;
      res.report = restarted_solve(*problem, x0, s, c);
    }
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    res.report = RunReport{};
    res.report.status = RunStatus::Failed;
    res.report.message = e.what();
  }

  res.row = base_row(spec);
  res.row.status = std::string(to_string(res.report.status));
  res.row.iterations = res.report.iterations;
  res.row.cycles = res.report.cycles;
  res.row.relative_error = res.report.relative_error;
  res.row.wall_seconds = res.report.wall_seconds;

  if (!spec.history_path.empty())
    write_file(spec.history_path, res.report.history);
  return res;
}

ReportRow failed_row(const ExperimentSpec &spec) {
  ReportRow row = base_row(spec);
  row.status = std::string(to_string(RunStatus::Failed));
  return row;
}

std::vector<ReportRow> run_matrix(const std::vector<ExperimentSpec> &specs, std::size_t jobs) {
  std::vector<ReportRow> rows(specs.size());
  auto run_one = [&](std::size_t i) {
    try {
      rows[i] = run_experiment(specs[i]).row;
    } catch (const std::exception &) {
      rows[i] = failed_row(specs[i]);
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, specs.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < specs.size(); ++i)
      run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        omp_set_num_threads(1);
        for (std::size_t i; (i = next.fetch_add(1)) < specs.size();)
          run_one(i);
      });
    }
    for (auto &t : workers)
      t.join();
  }

  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow &a, const ReportRow &b) {
    return std::tie(a.problem, a.n, a.alpha, a.lambda, a.stepper, a.extrap, a.q) <
           std::tie(b.problem, b.n, b.alpha, b.lambda, b.stepper, b.extrap, b.q);
  });
  return rows;
}

namespace {

void apply_key(ExperimentSpec &s, const std::string &key, const std::string &value) {
  if (key == "problem")
    s.problem = parse_problem(value);
  else if (key == "n")
    s.n = parse_unsigned(value, "n");
  else if (key == "alpha")
    s.alpha = parse_double(value, "alpha");
  else if (key == "lambda")
    s.lambda = parse_double(value, "lambda");
  else if (key == "stepper")
    s.stepper = parse_solver(value);
  else if (key == "extrap")
    s.extrap = parse_extrap(value);
  else if (key == "q")
    s.q = parse_unsigned(value, "q");
  else if (key == "tol")
    s.tol = parse_double(value, "tol");
  else if (key == "itermax")
    s.itermax = parse_unsigned(value, "itermax");
  else if (key == "tau0")
    s.tau0 = parse_double(value, "tau0");
  else if (key == "x0")
    s.x0 = parse_start(value);
  else if (key == "seed")
    s.seed = parse_unsigned(value, "seed");
  else if (key == "history")
    s.history_path = value;
  else
    throw ConfigError("unknown key '" + key + "'");
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  // Inline comments only apply to unquoted values.
  if (const auto hash = v.find('#'); hash != std::string::npos)
    v = trim(v.substr(0, hash));
  return v;
}

} // namespace

std::vector<ExperimentSpec> parse_matrix_config(std::istream &in) {
  std::vector<ExperimentSpec> specs;
  ExperimentSpec defaults;
  ExperimentSpec *current = nullptr;
  bool in_defaults = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    if (t.front() == '[') {
      const auto close = t.rfind(']');
      if (close == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      std::string name = trim(t.substr(1, close - 1));
      if (!name.empty() && name.front() == '[')
        name = trim(name.substr(1));
      in_defaults = name == "defaults";
      if (in_defaults) {
        if (!specs.empty())
          throw ConfigError("line " + std::to_string(lineno) +
                            ": [defaults] must precede the experiments");
        current = nullptr;
      } else {
        specs.push_back(defaults);
        current = &specs.back();
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = lower(trim(t.substr(0, eq)));
    const std::string value = unquote(trim(t.substr(eq + 1)));
    ExperimentSpec *target = in_defaults ? &defaults : current;
    if (!target)
      throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    try {
      apply_key(*target, key, value);
    } catch (const ConfigError &e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return specs;
}

void write_matrix_config(std::ostream &out, const std::vector<ExperimentSpec> &specs) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto &s = specs[i];
    out << "[run" << i << "]\n";
    out << "problem = " << to_string(s.problem) << '\n';
    out << "n = " << s.n << '\n';
    out << "alpha = " << format_double(s.alpha) << '\n';
    out << "lambda = " << format_double(s.lambda) << '\n';
    out << "stepper = " << to_string(s.stepper) << '\n';
    out << "extrap = " << (s.extrap ? to_string(*s.extrap) : "none") << '\n';
    out << "q = " << s.q << '\n';
    out << "tol = " << format_double(s.tol) << '\n';
    out << "itermax = " << s.itermax << '\n';
    out << "tau0 = " << format_double(s.tau0) << '\n';
    out << "x0 = " << to_string(s.x0) << '\n';
    out << "seed = " << s.seed << '\n';
    if (!s.history_path.empty())
      out << "history = \"" << s.history_path << "\"\n";
    out << '\n';
  }
}

namespace {

ExperimentSpec bratu_spec(double alpha, double lambda, SolverKind st, ExtrapMethod m,
                          std::size_t q) {
  ExperimentSpec s;
  s.problem = ProblemKind::Bratu;
  s.n = 100;
  s.alpha = alpha;
  s.lambda = lambda;
  s.stepper = st;
  s.extrap = m;
  s.q = q;
  return s;
}

ExperimentSpec sparse_spec(std::size_t n, SolverKind st, std::optional<ExtrapMethod> m,
                           std::size_t q) {
  ExperimentSpec s;
  s.problem = ProblemKind::Sparse;
  s.n = n;
  s.stepper = st;
  s.extrap = m;
  s.q = m ? q : 0;
  return s;
}

struct Table1Row {
  double alpha, lambda;
  std::size_t pgd_rre, pgd_mpe, sgd_rre, sgd_mpe;
};

constexpr Table1Row kTable1[] = {
    {1, 10, 6, 6, 6, 6}, {1, 9, 6, 6, 6, 6},  {1, 8, 6, 6, 6, 6},  {1, 7, 6, 6, 6, 6},
    {1, 6, 5, 5, 6, 6},  {2, 10, 6, 6, 6, 6}, {2, 9, 5, 5, 6, 6},  {2, 8, 7, 7, 6, 6},
    {2, 7, 10, 6, 6, 6}, {2, 6, 8, 6, 6, 6},  {3, 10, 6, 6, 6, 6}, {3, 9, 7, 6, 6, 6},
    {3, 8, 4, 3, 6, 6},  {4, 10, 5, 5, 6, 6}, {5, 10, 7, 7, 6, 6},
};

} // namespace

std::vector<ExperimentSpec> canned_table(int which, std::size_t max_n) {
  using M = ExtrapMethod;
  std::vector<ExperimentSpec> out;
  switch (which) {
  case 1:
    for (const auto &r : kTable1) {
      out.push_back(bratu_spec(r.alpha, r.lambda, SolverKind::PGD, M::RRE, r.pgd_rre));
      out.push_back(bratu_spec(r.alpha, r.lambda, SolverKind::PGD, M::MPE, r.pgd_mpe));
      out.push_back(bratu_spec(r.alpha, r.lambda, SolverKind::SGD, M::RRE, r.sgd_rre));
      out.push_back(bratu_spec(r.alpha, r.lambda, SolverKind::SGD, M::MPE, r.sgd_mpe));
    }
    break;
  case 2:
    for (double lambda : {10.0, 1e4, 1e5, 1e6}) {
      const std::size_t sgd_q = lambda > 10.0 ? 2 : 5;
      for (M m : {M::VEA, M::RRE, M::MPE})
        out.push_back(bratu_spec(0.0, lambda, SolverKind::PGD, m, 5));
      for (M m : {M::VEA, M::RRE, M::MPE})
        out.push_back(bratu_spec(0.0, lambda, SolverKind::SGD, m, sgd_q));
    }
    break;
  case 3: {
    struct Block {
      std::size_t n;
      std::vector<std::pair<M, std::size_t>> runs;
    };
    const Block blocks[] = {
        {1000,
         {{M::RRE, 1}, {M::MPE, 1}, {M::VEA, 1}, {M::RRE, 3}, {M::MPE, 3}, {M::VEA, 3},
          {M::RRE, 5}, {M::MPE, 5}, {M::VEA, 5}}},
        {1000000,
         {{M::RRE, 1}, {M::MPE, 1}, {M::VEA, 1}, {M::RRE, 5}, {M::MPE, 5}, {M::VEA, 5},
          {M::RRE, 6}, {M::MPE, 6}, {M::VEA, 6}}},
        {10000000, {{M::RRE, 1}, {M::MPE, 1}, {M::RRE, 7}, {M::MPE, 7}, {M::VEA, 1}, {M::VEA, 4}}},
    };
    for (const auto &b : blocks) {
      if (b.n > max_n)
        continue;
      out.push_back(sparse_spec(b.n, SolverKind::GN, std::nullopt, 0));
      for (const auto &[m, q] : b.runs)
        out.push_back(sparse_spec(b.n, SolverKind::SGD, m, q));
    }
    break;
  }
  default:
    throw ConfigError("unknown table " + std::to_string(which) + " (expected 1, 2 or 3)");
  }
  return out;
}

} // namespace vex::bench
