#pragma once

// Experiment harness behind the `bench` command-line tool.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vex/descent.hpp"

namespace vex::bench {

enum class ProblemKind { Bratu, Sparse };
enum class SolverKind { GD, PGD, SGD, GN };
/// Initial guess: unit = 1/sqrt(N) in every entry, random = U(-1,1)/sqrt(N).
enum class StartKind { Unit, Zero, Random };

std::string_view to_string(ProblemKind k);
std::string_view to_string(SolverKind k);
std::string_view to_string(StartKind k);
ProblemKind parse_problem(std::string_view s);
SolverKind parse_solver(std::string_view s);
StartKind parse_start(std::string_view s);
/// "none" maps to nullopt.
std::optional<ExtrapMethod> parse_extrap(std::string_view s);

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::Bratu;
  std::size_t n = 100;
  double alpha = 0.0;
  double lambda = 1.0;
  SolverKind stepper = SolverKind::PGD;
  std::optional<ExtrapMethod> extrap;
  std::size_t q = 0;
  double tol = 1e-5;
  std::size_t itermax = 500;
  double tau0 = 1.0;
  StartKind x0 = StartKind::Unit;
  std::uint64_t seed = 0;
  std::string history_path; ///< empty: no history file

  /// ConfigError for inconsistent combinations (PGD on sparse, GN with
  /// extrapolation, q < 1 with extrapolation, ...).
  void validate() const;
};

/// One line of the report CSV.
struct ReportRow {
  std::string problem;
  std::size_t n = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  std::string stepper;
  std::string extrap;
  std::size_t q = 0;
  std::string status;
  std::size_t iterations = 0;
  std::size_t cycles = 0;
  std::optional<double> relative_error;
  double wall_seconds = 0.0;

  bool operator==(const ReportRow &) const = default;
};

inline constexpr std::string_view kReportHeader =
    "problem,n,alpha,lambda,stepper,extrap,q,status,iterations,cycles,relative_error,wall_seconds";
inline constexpr std::string_view kHistoryHeader =
    "iteration,kind,rel_successive_norm,relative_error";

std::string format_row(const ReportRow &row);
/// ConfigError on malformed input.
ReportRow parse_row(std::string_view line);
void write_report(std::ostream &out, const std::vector<ReportRow> &rows);
std::vector<ReportRow> read_report(std::istream &in);

void write_history(std::ostream &out, const std::vector<HistoryEntry> &history);
std::vector<HistoryEntry> read_history(std::istream &in);

/// Initial guess for a problem with n unknowns.
Vector initial_guess(StartKind kind, std::size_t n, std::uint64_t seed);

struct ExperimentResult {
  ReportRow row;
  RunReport report;
};

/// Builds the problem, runs the solver and writes the history file if one
/// was requested. ConfigError for invalid specs, IoError for file failures.
ExperimentResult run_experiment(const ExperimentSpec &spec);

/// A row for a spec that could not be run.
ReportRow failed_row(const ExperimentSpec &spec);

/// Runs every spec (up to `jobs` at a time, each single-threaded when
/// jobs > 1) and returns the rows stably sorted by problem, parameters and
/// method. Per-spec errors become rows with status "failed".
std::vector<ReportRow> run_matrix(const std::vector<ExperimentSpec> &specs, std::size_t jobs = 1);

/// Parses `[section]` / `key = value` text. A `[defaults]` section applies to
/// every following section; each other section is one experiment.
std::vector<ExperimentSpec> parse_matrix_config(std::istream &in);
/// Writes specs in the format read by parse_matrix_config.
void write_matrix_config(std::ostream &out, const std::vector<ExperimentSpec> &specs);

/// Canned experiment matrices (1: extended Bratu, 2: standard
/// Bratu with large λ, 3: sparse sine). Sparse grids above max_n are skipped.
std::vector<ExperimentSpec> canned_table(int which, std::size_t max_n = SIZE_MAX);

} // namespace vex::bench
