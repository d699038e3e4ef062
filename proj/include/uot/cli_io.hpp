#pragma once

#include <string>
#include <vector>

#include "uot/admm_uot.hpp"
#include "uot/error.hpp"
#include "uot/scenarios.hpp"

namespace uot {

struct RunConfig {
  std::string scenario = "sphere";
  double beta = 1.0;
  double alpha = 1.0;
  double eta = 1.0;
  int nt = 16;
  int target_count = 400;
  int stencil_size = 0; // 0 = auto: 7 on surfaces, 3 on circle scenarios
  int poly_degree = 2;
  std::string shape_mode = "fixed"; // fixed | target
  double shape_epsilon = 1.0;
  double target_condition = 1e10;
  double tol = 1e-4;
  int max_iters = 3000;
  double rho_floor = 1e-12;
  double elliptic_tol = 1e-10;
  std::string output_dir = "out";
  std::vector<double> snapshot_times = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<int> refinements = {8, 16, 32, 64};
  std::uint64_t seed = 12345;
  double total_area = 0.0;        // 0 = auto (analytic area, or 1.0 when unknown)
  std::string density_pair = "airplane"; // densities for external clouds
  std::string projection = "normal";     // normal | orthogonal
  std::string elliptic_shift = "minus-one"; // minus-one | plus-one (reproduction)
  bool tangential_projection = false;

  int effective_stencil_size() const;
  bool is_circle_scenario() const;
};

class ConfigError : public Error {
public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "config line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

/// Strict `key = value` parser; '#' comments; unknown keys and out-of-range
/// values are errors carrying the line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Cloud + operators + factorized system + boundary densities per config.
UotProblem build_problem(const RunConfig& config);

/// One CSV per requested time (nearest-node snapping) with header
/// x,y,z,rho,f,mx,my,mz, plus cost.jsonl with one object per iteration.
void write_snapshots(const AdmmState& state, const PointCloud& cloud,
                     const std::vector<double>& times, const std::string& dir,
                     const TimeGrid& grid);
void write_cost_log(const std::vector<IterationReport>& history, const std::string& dir);
void write_manifest(const RunConfig& config, const std::string& dir);

struct PoissonTableRow {
  int inv_dt = 0;
  int inv_h = 0;
  double l1 = 0.0, l1_order = 0.0;
  double l2 = 0.0, l2_order = 0.0;
};
std::vector<PoissonTableRow> poisson_table(const RunConfig& config);

struct Ot1dTableRow {
  int inv_dt = 0;
  int inv_h = 0;
  double w_computed = 0.0;
  double w_oracle = 0.0;
  double abs_err = 0.0;
  bool converged = false;
};
std::vector<Ot1dTableRow> ot1d_table(const RunConfig& config);

/// Exit codes: 0 success, 1 non-convergence (artifacts still written),
/// 2 config error, 3 runtime failure.
int run_command(const std::vector<std::string>& args);

} // namespace uot
