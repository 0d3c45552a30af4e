#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vex/bench.hpp"
#include "vex/errors.hpp"

namespace {

namespace vb = vex::bench;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kIoError = 2;

void emit_report(const std::string &path, const std::vector<vb::ReportRow> &rows) {
  if (path.empty() || path == "-") {
    vb::write_report(std::cout, rows);
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw vex::IoError("cannot open '" + path + "' for writing");
  vb::write_report(out, rows);
  if (!out)
    throw vex::IoError("failed writing '" + path + "'");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Restarted extrapolation benchmarks for nonlinear least squares"};
  app.require_subcommand(1);

  vb::ExperimentSpec spec;
  std::string problem = "bratu", stepper, extrap = "none", x0 = "unit", out_path, history_path;
  auto *run = app.add_subcommand("run", "Run a single experiment and write one report row");
  run->add_option("--problem", problem, "bratu or sparse")->required();
  run->add_option("--n", spec.n, "Grid points per direction (bratu) or unknowns (sparse)")
      ->required();
  run->add_option("--alpha", spec.alpha, "Convection coefficient (bratu)");
  run->add_option("--lambda", spec.lambda, "Reaction coefficient (bratu)");
  run->add_option("--stepper", stepper, "gd, pgd, sgd or gn")->required();
  run->add_option("--extrap", extrap, "rre, mpe, vea or none");
  run->add_option("--q", spec.q, "Extrapolation order");
  run->add_option("--tol", spec.tol, "Relative successive-iterate tolerance");
  run->add_option("--itermax", spec.itermax, "Budget of stepper iterations");
  run->add_option("--tau0", spec.tau0, "Initial Armijo step");
  run->add_option("--x0", x0, "Initial guess: unit, zero or random");
  run->add_option("--seed", spec.seed, "Seed for --x0 random");
  run->add_option("--out", out_path, "Report CSV (stdout when omitted)");
  run->add_option("--history", history_path, "Convergence history CSV");

  std::string config_path, matrix_out;
  std::size_t jobs = 1;
  auto *matrix = app.add_subcommand("matrix", "Run every experiment of a config file");
  matrix->add_option("--config", config_path, "Experiment config file")->required();
  matrix->add_option("--jobs", jobs, "Concurrent experiments")->check(CLI::PositiveNumber);
  matrix->add_option("--out", matrix_out, "Report CSV")->required();

  int which = 0;
  std::string tables_dir;
  std::size_t max_n = SIZE_MAX;
  auto *tables = app.add_subcommand("tables", "Run a canned experiment matrix");
  tables->add_option("--which", which, "Table number")->required()->check(CLI::Range(1, 3));
  tables->add_option("--out", tables_dir, "Output directory")->required();
  tables->add_option("--jobs", jobs, "Concurrent experiments")->check(CLI::PositiveNumber);
  tables->add_option("--max-n", max_n, "Skip sparse grids larger than this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      spec.problem = vb::parse_problem(problem);
      spec.stepper = vb::parse_solver(stepper);
      spec.extrap = vb::parse_extrap(extrap);
      spec.x0 = vb::parse_start(x0);
      spec.history_path = history_path;
      if (spec.extrap && spec.q == 0)
        spec.q = 1;
      const auto result = vb::run_experiment(spec);
      emit_report(out_path, {result.row});
      if (!result.report.message.empty() && result.report.status != vex::RunStatus::Converged)
        std::cerr << "note: " << result.report.message << '\n';
    } else if (*matrix) {
      std::ifstream in(config_path);
      if (!in)
        throw vex::IoError("cannot open config '" + config_path + "'");
      const auto specs = vb::parse_matrix_config(in);
      emit_report(matrix_out, vb::run_matrix(specs, jobs));
    } else if (*tables) {
      const auto specs = vb::canned_table(which, max_n);
      std::error_code ec;
      std::filesystem::create_directories(tables_dir, ec);
      if (ec)
        throw vex::IoError("cannot create '" + tables_dir + "': " + ec.message());
      const auto path =
          (std::filesystem::path(tables_dir) / ("table" + std::to_string(which) + ".csv")).string();
      emit_report(path, vb::run_matrix(specs, jobs));
      std::cerr << "wrote " << path << '\n';
    }
  } catch (const vex::IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const vex::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
