#include "uot/cli_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace uot {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
  size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "value '" + v + "' for key '" + key + "' is not a number");
  }
  if (pos != v.size()) {
    throw ConfigError(line, "trailing characters in value '" + v + "' for key '" + key + "'");
  }
  return out;
}

long parse_int(const std::string& v, int line, const std::string& key) {
  size_t pos = 0;
  long out = 0;
  try {
    out = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "value '" + v + "' for key '" + key + "' is not an integer");
  }
  if (pos != v.size()) {
    throw ConfigError(line, "trailing characters in value '" + v + "' for key '" + key + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<std::string> kScenarioNames = {
    "sphere",   "ellipsoid", "peanut",         "torus",      "opener",
    "sphere-s1", "sphere-s2", "circle-poisson", "circle-ot1d"};

bool known_scenario(const std::string& name) {
  if (name.rfind("external:", 0) == 0) return name.size() > 9;
  for (const auto& s : kScenarioNames) {
    if (s == name) return true;
  }
  return false;
}

} // namespace

int RunConfig::effective_stencil_size() const {
  if (stencil_size > 0) return stencil_size;
  return is_circle_scenario() ? 3 : 7;
}

bool RunConfig::is_circle_scenario() const { return scenario.rfind("circle-", 0) == 0; }

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(lineno, "expected `key = value`, got '" + trim(raw) + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(lineno, "empty key or value");
    }

    if (key == "scenario") {
      if (!known_scenario(value)) throw ConfigError(lineno, "unknown scenario '" + value + "'");
      cfg.scenario = value;
    } else if (key == "beta") {
      cfg.beta = parse_double(value, lineno, key);
      if (!(cfg.beta > 0.0)) throw ConfigError(lineno, "beta must be positive");
    } else if (key == "alpha") {
      cfg.alpha = parse_double(value, lineno, key);
      if (!(cfg.alpha > 0.0)) throw ConfigError(lineno, "alpha must be positive");
    } else if (key == "eta") {
      cfg.eta = parse_double(value, lineno, key);
      if (!(cfg.eta > 0.0)) throw ConfigError(lineno, "eta must be positive");
    } else if (key == "nt") {
      cfg.nt = static_cast<int>(parse_int(value, lineno, key));
      if (cfg.nt < 2) throw ConfigError(lineno, "nt must be at least 2");
    } else if (key == "target_count") {
      cfg.target_count = static_cast<int>(parse_int(value, lineno, key));
      if (cfg.target_count < 8) throw ConfigError(lineno, "target_count must be at least 8");
    } else if (key == "stencil_size") {
      cfg.stencil_size = static_cast<int>(parse_int(value, lineno, key));
      if (cfg.stencil_size < 0) throw ConfigError(lineno, "stencil_size must be nonnegative");
    } else if (key == "poly_degree") {
      cfg.poly_degree = static_cast<int>(parse_int(value, lineno, key));
      if (cfg.poly_degree < 0) throw ConfigError(lineno, "poly_degree must be nonnegative");
    } else if (key == "shape_mode") {
      if (value != "fixed" && value != "target") {
        throw ConfigError(lineno, "shape_mode must be `fixed` or `target`");
      }
      cfg.shape_mode = value;
    } else if (key == "shape_epsilon") {
      cfg.shape_epsilon = parse_double(value, lineno, key);
      if (!(cfg.shape_epsilon > 0.0)) throw ConfigError(lineno, "shape_epsilon must be positive");
    } else if (key == "target_condition") {
      cfg.target_condition = parse_double(value, lineno, key);
      if (!(cfg.target_condition > 1.0)) {
        throw ConfigError(lineno, "target_condition must exceed 1");
      }
    } else if (key == "tol") {
      cfg.tol = parse_double(value, lineno, key);
      if (!(cfg.tol > 0.0)) throw ConfigError(lineno, "tol must be positive");
    } else if (key == "max_iters") {
      cfg.max_iters = static_cast<int>(parse_int(value, lineno, key));
      if (cfg.max_iters < 1) throw ConfigError(lineno, "max_iters must be at least 1");
    } else if (key == "rho_floor") {
      cfg.rho_floor = parse_double(value, lineno, key);
      if (cfg.rho_floor < 0.0) throw ConfigError(lineno, "rho_floor must be nonnegative");
    } else if (key == "elliptic_tol") {
      cfg.elliptic_tol = parse_double(value, lineno, key);
      if (!(cfg.elliptic_tol > 0.0)) throw ConfigError(lineno, "elliptic_tol must be positive");
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "snapshot_times") {
      cfg.snapshot_times.clear();
      for (const auto& item : split_list(value)) {
        const double t = parse_double(item, lineno, key);
        if (t < 0.0 || t > 1.0) throw ConfigError(lineno, "snapshot times must lie in [0, 1]");
        cfg.snapshot_times.push_back(t);
      }
    } else if (key == "refinements") {
      cfg.refinements.clear();
      for (const auto& item : split_list(value)) {
        const int n = static_cast<int>(parse_int(item, lineno, key));
        if (n < 8) throw ConfigError(lineno, "refinements must be at least 8");
        cfg.refinements.push_back(n);
      }
    } else if (key == "seed") {
      const long s = parse_int(value, lineno, key);
      if (s < 0) throw ConfigError(lineno, "seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "total_area") {
      cfg.total_area = parse_double(value, lineno, key);
      if (cfg.total_area < 0.0) throw ConfigError(lineno, "total_area must be nonnegative");
    } else if (key == "density_pair") {
      if (value != "airplane" && value != "cow") {
        throw ConfigError(lineno, "density_pair must be `airplane` or `cow`");
      }
      cfg.density_pair = value;
    } else if (key == "projection") {
      if (value != "normal" && value != "orthogonal") {
        throw ConfigError(lineno, "projection must be `normal` or `orthogonal`");
      }
      cfg.projection = value;
    } else if (key == "elliptic_shift") {
      if (value != "minus-one" && value != "plus-one") {
        throw ConfigError(lineno, "elliptic_shift must be `minus-one` or `plus-one`");
      }
      cfg.elliptic_shift = value;
    } else if (key == "tangential_projection") {
      if (value != "true" && value != "false") {
        throw ConfigError(lineno, "tangential_projection must be `true` or `false`");
      }
      cfg.tangential_projection = (value == "true");
    } else {
      throw ConfigError(lineno, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

KernelConfig kernel_config(const RunConfig& cfg) {
  KernelConfig kc;
  kc.stencil_size = cfg.effective_stencil_size();
  kc.poly_degree = cfg.poly_degree;
  kc.shape_mode = (cfg.shape_mode == "fixed") ? ShapeMode::Fixed : ShapeMode::TargetCondition;
  kc.fixed_shape = cfg.shape_epsilon;
  kc.target_condition = cfg.target_condition;
  return kc;
}

ProjectionMode projection_mode(const RunConfig& cfg) {
  return cfg.projection == "normal" ? ProjectionMode::AlongNeighborNormal
                                    : ProjectionMode::Orthogonal;
}

EllipticOptions elliptic_options(const RunConfig& cfg) {
  EllipticOptions opts;
  opts.tol = cfg.elliptic_tol;
  opts.shift = (cfg.elliptic_shift == "minus-one") ? -1.0 : 1.0;
  return opts;
}

PointCloud scenario_cloud(const RunConfig& cfg, Eigen::VectorXd* rho0,
                          Eigen::VectorXd* rhoT) {
  const std::optional<double> area =
      cfg.total_area > 0.0 ? std::optional<double>(cfg.total_area) : std::nullopt;

  if (cfg.scenario == "circle-ot1d") {
    Ot1dCase c = ot_1d_case(cfg.target_count);
    *rho0 = c.rho0;
    *rhoT = cfg.beta * c.rho1;
    return c.cloud;
  }
  if (cfg.scenario == "circle-poisson") {
    throw ConfigError(0, "scenario circle-poisson carries no transport densities; "
                         "run the poisson-table command instead");
  }
  if (cfg.scenario.rfind("external:", 0) == 0) {
    PointCloud cloud = load_cloud(cfg.scenario.substr(9), area.value_or(1.0));
    auto [d0, d1] = scenario_densities(cfg.density_pair, cfg.beta);
    *rho0 = evaluate_density(d0, cloud);
    *rhoT = evaluate_density(d1, cloud);
    return cloud;
  }

  const bool symmetric = cfg.scenario == "sphere-s1" || cfg.scenario == "sphere-s2";
  const LevelSetSurface surface = surface_by_name(symmetric ? "sphere" : cfg.scenario);
  PointCloud cloud = symmetric
                         ? sample_surface_symmetric(surface, cfg.target_count, cfg.seed, area)
                         : sample_surface(surface, cfg.target_count, cfg.seed, area);
  auto [d0, d1] = scenario_densities(cfg.scenario, cfg.beta);
  *rho0 = evaluate_density(d0, cloud);
  *rhoT = evaluate_density(d1, cloud);
  return cloud;
}

} // namespace

UotProblem build_problem(const RunConfig& cfg) {
  Eigen::VectorXd rho0, rhoT;
  PointCloud cloud = scenario_cloud(cfg, &rho0, &rhoT);

  const auto frames = build_frames(cloud);
  StencilSet stencils = build_stencils(cloud, frames, kernel_config(cfg), projection_mode(cfg));
  SpatialOperator L = assemble_laplacian(stencils);
  auto gradient = assemble_gradient(stencils);
  SpectralBasis basis = build_spectral_basis(TimeGrid::uniform(cfg.nt));
  EllipticSystem system(L, basis, elliptic_options(cfg));

  return UotProblem{std::move(cloud),  std::move(stencils), std::move(L),
                    std::move(gradient), std::move(system),   std::move(rho0),
                    std::move(rhoT),   cfg.alpha,           cfg.eta};
}

void write_snapshots(const AdmmState& state, const PointCloud& cloud,
                     const std::vector<double>& times, const std::string& dir,
                     const TimeGrid& grid) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (double t : times) {
    int index = static_cast<int>(std::llround(t / grid.dt));
    index = std::clamp(index, 0, grid.nt);
    if (std::abs(t - index * grid.dt) > 1e-12) {
      std::cerr << "snapshot time " << t << " snapped to grid node " << index << " (t = "
                << index * grid.dt << ")\n";
    }
    const std::string path = dir + "/snapshot_t" + std::to_string(index) + ".csv";
    std::ofstream out(path);
    if (!out) throw make_error("cannot write snapshot file '", path, "'");
    out << "x,y,z,rho,f,mx,my,mz\n";
    for (int j = 0; j < cloud.size(); ++j) {
      out << fmt17(cloud.points[j][0]) << ',' << fmt17(cloud.points[j][1]) << ','
          << fmt17(cloud.points[j][2]) << ',' << fmt17(state.rho_bar(index, j)) << ','
          << fmt17(state.f_bar(index, j)) << ',' << fmt17(state.m_bar.x(index, j)) << ','
          << fmt17(state.m_bar.y(index, j)) << ',' << fmt17(state.m_bar.z(index, j))
          << '\n';
    }
  }
}

void write_cost_log(const std::vector<IterationReport>& history, const std::string& dir) {
  const std::string path = dir + "/cost.jsonl";
  std::ofstream out(path);
  if (!out) throw make_error("cannot write '", path, "'");
  for (const auto& rep : history) {
    out << "{\"iter\":" << rep.iteration << ",\"primal\":" << fmt17(rep.primal)
        << ",\"dual\":" << fmt17(rep.dual) << ",\"continuity\":" << fmt17(rep.continuity)
        << ",\"wfr\":" << fmt17(rep.wfr) << "}\n";
  }
}

void write_manifest(const RunConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  nlohmann::ordered_json j;
  j["scenario"] = cfg.scenario;
  j["beta"] = cfg.beta;
  j["alpha"] = cfg.alpha;
  j["eta"] = cfg.eta;
  j["nt"] = cfg.nt;
  j["target_count"] = cfg.target_count;
  j["stencil_size"] = cfg.effective_stencil_size();
  j["poly_degree"] = cfg.poly_degree;
  j["shape_mode"] = cfg.shape_mode;
  j["shape_epsilon"] = cfg.shape_epsilon;
  j["target_condition"] = cfg.target_condition;
  j["tol"] = cfg.tol;
  j["max_iters"] = cfg.max_iters;
  j["rho_floor"] = cfg.rho_floor;
  j["elliptic_tol"] = cfg.elliptic_tol;
  j["output_dir"] = cfg.output_dir;
  j["snapshot_times"] = cfg.snapshot_times;
  j["refinements"] = cfg.refinements;
  j["seed"] = cfg.seed;
  j["total_area"] = cfg.total_area;
  j["density_pair"] = cfg.density_pair;
  j["projection"] = cfg.projection;
  j["elliptic_shift"] = cfg.elliptic_shift;
  j["tangential_projection"] = cfg.tangential_projection;
  const std::string path = dir + "/manifest.json";
  std::ofstream out(path);
  if (!out) throw make_error("cannot write '", path, "'");
  out << j.dump(2) << '\n';
}

std::vector<PoissonTableRow> poisson_table(const RunConfig& cfg) {
  std::vector<PoissonTableRow> rows;
  for (size_t r = 0; r < cfg.refinements.size(); ++r) {
    const int n = cfg.refinements[r];
    Poisson1dCase pc = poisson_1d_case(n);

    RunConfig local = cfg;
    local.scenario = "circle-poisson";
    const auto frames = build_frames(pc.cloud);
    StencilSet stencils =
        build_stencils(pc.cloud, frames, kernel_config(local), projection_mode(local));
    SpatialOperator L = assemble_laplacian(stencils);
    SpectralBasis basis = build_spectral_basis(pc.grid);
    EllipticSystem system(std::move(L), std::move(basis), elliptic_options(local));

    const Eigen::MatrixXd lambda = system.solve(pc.rhs, pc.g0, pc.gT);
    const Eigen::MatrixXd err = lambda - pc.exact;
    const double count = static_cast<double>(err.size());

    PoissonTableRow row;
    row.inv_dt = n;
    row.inv_h = n;
    row.l1 = err.cwiseAbs().sum() / count;
    row.l2 = std::sqrt(err.cwiseAbs2().sum() / count);
    if (r > 0) {
      const double hr = std::log(static_cast<double>(n) / cfg.refinements[r - 1]);
      row.l1_order = std::log(rows[r - 1].l1 / row.l1) / hr;
      row.l2_order = std::log(rows[r - 1].l2 / row.l2) / hr;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<Ot1dTableRow> ot1d_table(const RunConfig& cfg) {
  std::vector<Ot1dTableRow> rows;
  for (int n : cfg.refinements) {
    RunConfig local = cfg;
    local.scenario = "circle-ot1d";
    local.target_count = n;
    local.nt = n;
    UotProblem problem = build_problem(local);

    AdmmParams params;
    params.tol = cfg.tol;
    params.max_iters = cfg.max_iters;
    params.rho_floor = cfg.rho_floor;
    params.project_m_bar = cfg.tangential_projection;
    const AdmmResult result = run(problem, params);

    Ot1dTableRow row;
    row.inv_dt = n;
    row.inv_h = n;
    row.w_computed = result.history.back().wfr;
    row.w_oracle = ot_1d_oracle_cost();
    row.abs_err = std::abs(row.w_computed - row.w_oracle);
    row.converged = result.state.converged;
    rows.push_back(row);
  }
  return rows;
}

namespace {

int cmd_solve(const RunConfig& cfg) {
  write_manifest(cfg, cfg.output_dir);
  UotProblem problem = build_problem(cfg);

  AdmmParams params;
  params.tol = cfg.tol;
  params.max_iters = cfg.max_iters;
  params.rho_floor = cfg.rho_floor;
  params.project_m_bar = cfg.tangential_projection;
  const AdmmResult result = run(problem, params);

  write_cost_log(result.history, cfg.output_dir);
  write_snapshots(result.state, problem.cloud, cfg.snapshot_times, cfg.output_dir,
                  problem.grid());

  const auto& last = result.history.back();
  std::cout << "scenario " << cfg.scenario << ": " << result.history.size()
            << " iterations, " << (result.state.converged ? "converged" : "NOT converged")
            << ", W_WFR = " << fmt17(last.wfr) << "\n";
  return result.state.converged ? 0 : 1;
}

int cmd_poisson_table(const RunConfig& cfg) {
  write_manifest(cfg, cfg.output_dir);
  const auto rows = poisson_table(cfg);
  const std::string path = cfg.output_dir + "/poisson_table.csv";
  std::ofstream out(path);
  if (!out) throw make_error("cannot write '", path, "'");
  out << "inv_dt,inv_h,l1,l1_order,l2,l2_order\n";
  std::cout << "inv_dt,inv_h,l1,l1_order,l2,l2_order\n";
  for (size_t r = 0; r < rows.size(); ++r) {
    std::ostringstream line;
    line << rows[r].inv_dt << ',' << rows[r].inv_h << ',' << fmt17(rows[r].l1) << ',';
    if (r == 0) {
      line << '-';
    } else {
      line << fmt17(rows[r].l1_order);
    }
    line << ',' << fmt17(rows[r].l2) << ',';
    if (r == 0) {
      line << '-';
    } else {
      line << fmt17(rows[r].l2_order);
    }
    out << line.str() << '\n';
    std::cout << line.str() << '\n';
  }
  return 0;
}

int cmd_ot1d_table(const RunConfig& cfg) {
  write_manifest(cfg, cfg.output_dir);
  const auto rows = ot1d_table(cfg);
  const std::string path = cfg.output_dir + "/ot1d_table.csv";
  std::ofstream out(path);
  if (!out) throw make_error("cannot write '", path, "'");
  out << "inv_dt,inv_h,w_computed,w_oracle,abs_err\n";
  std::cout << "inv_dt,inv_h,w_computed,w_oracle,abs_err\n";
  bool all_converged = true;
  for (const auto& row : rows) {
    std::ostringstream line;
    line << row.inv_dt << ',' << row.inv_h << ',' << fmt17(row.w_computed) << ','
         << fmt17(row.w_oracle) << ',' << fmt17(row.abs_err);
    out << line.str() << '\n';
    std::cout << line.str() << '\n';
    all_converged = all_converged && row.converged;
  }
  return all_converged ? 0 : 1;
}

int cmd_stencil_audit(const RunConfig& cfg) {
  write_manifest(cfg, cfg.output_dir);

  PointCloud cloud;
  if (cfg.is_circle_scenario()) {
    cloud = circle_cloud(cfg.target_count);
  } else {
    Eigen::VectorXd rho0, rhoT;
    cloud = scenario_cloud(cfg, &rho0, &rhoT);
  }
  const auto frames = build_frames(cloud);
  const KernelConfig kc = kernel_config(cfg);
  StencilSet stencils = build_stencils(cloud, frames, kc, projection_mode(cfg));

  const std::string path = cfg.output_dir + "/stencil_audit.txt";
  std::ofstream out(path);
  if (!out) throw make_error("cannot write '", path, "'");
  for (int j = 0; j < stencils.size(); ++j) {
    out << j << ' ' << fmt17(stencils.shape_lap[j]) << ' ' << fmt17(stencils.cond_lap[j]);
    for (int k = 0; k < stencils.stencil_size; ++k) {
      out << ' ' << fmt17(stencils.lap_weights(j, k));
    }
    out << '\n';
  }

  // Exactness report: constraint defects recomputed from the stored stencils.
  double max_zero_sum = 0.0;
  double max_lap_defect = 0.0;
  double max_div_defect = 0.0;
  const auto lap_basis = monomial_basis(2, cfg.poly_degree);
  const int div_degree = feasible_divergence_degree(cfg.poly_degree, kc.stencil_size);
  const auto div_basis = monomial_basis(3, div_degree);
  LaplacianOp lap_op;

  for (int j = 0; j < stencils.size(); ++j) {
    max_zero_sum = std::max(max_zero_sum, std::abs(stencils.lap_weights.row(j).sum()));
    for (int c = 0; c < 3; ++c) {
      max_zero_sum = std::max(max_zero_sum, std::abs(stencils.div_weights[c].row(j).sum()));
    }

    std::vector<Eigen::VectorXd> proj(kc.stencil_size), rot(kc.stencil_size);
    for (int k = 0; k < kc.stencil_size; ++k) {
      proj[k] = Eigen::Vector2d(stencils.proj_u(j, k), stencils.proj_v(j, k));
      rot[k] = frames[j].rotation *
               (cloud.points[stencils.neighbors(j, k)] - cloud.points[j]);
    }
    for (const auto& mono : lap_basis) {
      double sum = 0.0;
      for (int k = 0; k < kc.stencil_size; ++k) {
        sum += stencils.lap_weights(j, k) * monomial_eval(mono, proj[k]);
      }
      // Pruned (degenerate) monomials register as consistent with 0 data.
      double applied = 0.0;
      bool degenerate = true;
      for (int k = 0; k < kc.stencil_size && degenerate; ++k) {
        if (std::abs(monomial_eval(mono, proj[k])) > 1e-12) degenerate = false;
      }
      if (!degenerate) {
        applied = lap_op.monomial_rhs(mono);
        max_lap_defect = std::max(max_lap_defect, std::abs(sum - applied));
      }
    }
    for (const auto& mono : div_basis) {
      for (int c = 0; c < 3; ++c) {
        const Eigen::Vector3d dir(frames[j].s1[c], frames[j].s2[c], 0.0);
        DirectionalGradientOp op{dir};
        double sum = 0.0;
        bool degenerate = true;
        for (int k = 0; k < kc.stencil_size; ++k) {
          const double value = monomial_eval(mono, rot[k]);
          sum += stencils.div_weights[c](j, k) * value;
          if (std::abs(value) > 1e-12) degenerate = false;
        }
        if (!degenerate) {
          max_div_defect = std::max(max_div_defect, std::abs(sum - op.monomial_rhs(mono)));
        }
      }
    }
  }

  std::cout << "stencil audit on " << cloud.label << " (" << cloud.size() << " nodes, n = "
            << kc.stencil_size << ", l = " << cfg.poly_degree << ")\n"
            << "  max |sum of weights|      = " << fmt17(max_zero_sum) << "\n"
            << "  max Laplacian poly defect = " << fmt17(max_lap_defect) << "\n"
            << "  max divergence poly defect (degree " << div_degree << ") = "
            << fmt17(max_div_defect) << "\n"
            << "  shape range [" << fmt17(stencils.shape_lap.minCoeff()) << ", "
            << fmt17(stencils.shape_lap.maxCoeff()) << "], condition range ["
            << fmt17(stencils.cond_lap.minCoeff()) << ", "
            << fmt17(stencils.cond_lap.maxCoeff()) << "]\n";
  return 0;
}

void usage(std::ostream& os) {
  os << "usage: uot <solve|poisson-table|ot1d-table|stencil-audit> [config-file]\n";
}

} // namespace

int run_command(const std::vector<std::string>& args) {
  try {
    if (args.empty() || args.size() > 2) {
      usage(std::cerr);
      return 2;
    }
    const std::string& cmd = args[0];
    const RunConfig cfg = (args.size() == 2) ? load_config(args[1]) : RunConfig{};
    if (cmd == "solve") return cmd_solve(cfg);
    if (cmd == "poisson-table") return cmd_poisson_table(cfg);
    if (cmd == "ot1d-table") return cmd_ot1d_table(cfg);
    if (cmd == "stencil-audit") return cmd_stencil_audit(cfg);
    usage(std::cerr);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

} // namespace uot
