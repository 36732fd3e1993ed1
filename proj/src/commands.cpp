#include "okoc/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "okoc/csv.hpp"
#include "okoc/errors.hpp"
#include "okoc/occupation.hpp"
#include "okoc/oracle.hpp"

namespace okoc {

using nlohmann::json;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string default_out(const std::string& problem_path, const char* suffix) {
  std::filesystem::path p(problem_path);
  p.replace_extension();
  return p.string() + suffix;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + path);
  f << contents;
  if (!f) throw ArgumentError("failed writing " + path);
}

// Runs a command body and maps failures onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ExpressionError& e) {
    err << "expression error: " << e.what() << '\n';
    return kExitExpression;
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

void write_points_csv(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& pts, const Eigen::VectorXd* extra) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      os << (c ? "," : "") << csv::format_double(pts(r, c));
    }
    if (extra) os << ',' << csv::format_double((*extra)(r));
    os << '\n';
  }
  write_file(path, os.str());
}

std::vector<std::string> coord_names(char prefix, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void emit_solve_plot_data(const std::string& dir, const ProblemSpec& spec, const SolveRun& run) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> s_header{"t"};
  for (auto& s : coord_names('x', spec.n)) s_header.push_back(s);
  for (auto& s : coord_names('u', spec.m)) s_header.push_back(s);
  s_header.push_back("w");
  write_points_csv(dir + "/s_centers.csv", s_header, run.centers.s_centers, &run.result.w);

  std::vector<std::string> d_header = coord_names('x', spec.n);
  d_header.push_back("v");
  write_points_csv(dir + "/d_centers.csv", d_header, run.centers.d_centers, &run.result.v);

  std::vector<std::string> sigma_header{"t"};
  for (auto& s : coord_names('x', spec.n)) sigma_header.push_back(s);
  sigma_header.push_back("multiplier");
  write_points_csv(dir + "/sigma_centers.csv", sigma_header, run.centers.sigma_centers,
                   &run.result.eq_multipliers);
}

std::map<std::string, std::string> key_values(const std::vector<std::string>& tokens,
                                              const char* flag) {
  std::map<std::string, std::string> kv;
  for (const std::string& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ArgumentError(std::string(flag) + ": expected key=value, got '" + tok + "'");
    }
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

double flag_number(const std::string& text, const std::string& key) {
  try {
    return csv::parse_double(text, 0);
  } catch (const std::exception&) {
    throw ArgumentError(key + ": not a number: '" + text + "'");
  }
}

}  // namespace

int exit_code_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return kExitOk;
    case SolveStatus::ToleranceNotMet:
      return kExitToleranceNotMet;
    case SolveStatus::Infeasible:
      return kExitInfeasible;
  }
  return kExitNumeric;
}

SolveRun run_solve(const ProblemConfig& config, bool emit_weights) {
  const auto start = std::chrono::steady_clock::now();
  const CenterParams& cp = config.centers;
  SolveRun run;
  run.centers = generate_centers(config.spec, cp.M_S, cp.M_D, cp.M_b, cp.strategy, cp.seed);
  run.program = assemble(config.spec, run.centers);
  run.result = solve(run.program, config.solver);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const SolveResult& r = run.result;
  json& rep = run.report;
  rep["config"] = config.resolved;
  rep["status"] = std::string(to_string(r.status));
  rep["objective"] = r.objective;
  rep["eq_residual_inf"] = r.eq_residual_inf;
  rep["ball_S_used"] = r.ball_S_used;
  rep["ball_D_used"] = r.ball_D_used;
  rep["stationarity"] = r.stationarity;
  rep["complementarity"] = r.complementarity;
  rep["iterations"] = r.iterations;
  rep["outer_iterations"] = r.outer_iterations;
  rep["dropped_rows"] = r.dropped_rows;
  rep["far_rows"] = run.program.far_rows;
  rep["radii"] = {{"r_S", run.program.r_S}, {"r_D", run.program.r_D}};
  rep["wall_clock_seconds"] = seconds;
  if (emit_weights) rep["weights"] = {{"w", to_std(r.w)}, {"v", to_std(r.v)}};
  return run;
}

int cmd_solve(const std::string& problem_path, const SolveFlags& flags, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    ProblemConfig config = load_problem_file(problem_path);
    if (flags.seed) override_seed(config, *flags.seed);
    const SolveRun run = run_solve(config, flags.emit_weights);
    const std::string path = flags.out.value_or(default_out(problem_path, ".report.json"));
    write_file(path, run.report.dump(2) + "\n");
    if (flags.plot_dir) emit_solve_plot_data(*flags.plot_dir, config.spec, run);
    err << "status " << to_string(run.result.status) << ", objective " << run.result.objective
        << ", ||Az-b||_inf " << run.result.eq_residual_inf << '\n';
    out << path << '\n';
    return exit_code_for(run.result.status);
  });
}

int cmd_validate(const std::string& problem_path, const ValidateFlags& flags, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const ProblemConfig config = load_problem_file(problem_path);
    const ProblemSpec& spec = config.spec;
    if (flags.controls < 1 || flags.centers < 1 || flags.segments < 1) {
      throw ArgumentError("controls, centers and segments must be >= 1");
    }
    if (flags.steps < 2 || flags.steps % 2 != 0) throw ArgumentError("steps must be even, >= 2");
    if (flags.steps % (2 * flags.segments) != 0) {
      err << "warning: control jumps do not fall on Simpson panel boundaries\n";
    }

    std::mt19937_64 rng(flags.seed.value_or(config.centers.seed));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample = [&](const Box& box) {
      Eigen::VectorXd p(box.dim());
      for (int i = 0; i < box.dim(); ++i) {
        p(i) = box.lower(i) + unit(rng) * (box.upper(i) - box.lower(i));
      }
      return p;
    };

    const double norm_bound = spec.horizon * spec.horizon * phi0(spec.kernel_S);
    std::ostringstream table;
    table << "kind,trajectory,center,value,threshold,pass\n";
    std::vector<double> residuals;
    bool all_pass = true;
    double max_residual = 0.0;
    for (int k = 0; k < flags.controls; ++k) {
      std::vector<Eigen::VectorXd> values;
      for (int s = 0; s < flags.segments; ++s) values.push_back(sample(spec.U));
      const Trajectory traj =
          simulate(spec.dynamics, spec.x0,
                   PiecewiseControl::uniform(spec.horizon, std::move(values)), spec.horizon,
                   flags.steps);
      const double norm = occupation_norm_sq(spec.kernel_S, traj);
      const bool norm_ok = norm <= norm_bound * (1.0 + flags.norm_slack);
      all_pass = all_pass && norm_ok;
      table << "norm," << k << ",," << csv::format_double(norm) << ','
            << csv::format_double(norm_bound * (1.0 + flags.norm_slack)) << ','
            << (norm_ok ? 1 : 0) << '\n';
      for (int c = 0; c < flags.centers; ++c) {
        const Eigen::VectorXd center = sample(spec.sigma_box());
        const double res = adjoint_identity_residual(spec.kernel_Sigma, spec.dynamics, traj, center);
        const bool ok = res <= flags.threshold;
        all_pass = all_pass && ok;
        max_residual = std::max(max_residual, res);
        residuals.push_back(res);
        table << "adjoint," << k << ',' << c << ',' << csv::format_double(res) << ','
              << csv::format_double(flags.threshold) << ',' << (ok ? 1 : 0) << '\n';
      }
    }

    const std::string path = flags.out.value_or(default_out(problem_path, ".validate.csv"));
    write_file(path, table.str());
    if (flags.plot_dir) {
      std::filesystem::create_directories(*flags.plot_dir);
      // log10 histogram, one bin per decade from 1e-16 to 1e0
      std::vector<int> bins(17, 0);
      for (double r : residuals) {
        const double l = r > 0.0 ? std::floor(std::log10(r)) : -16.0;
        const int idx = static_cast<int>(std::clamp(l, -16.0, 0.0)) + 16;
        ++bins[static_cast<std::size_t>(idx)];
      }
      std::ostringstream hist;
      hist << "log10_lo,log10_hi,count\n";
      for (int i = 0; i < 17; ++i) hist << i - 16 << ',' << i - 15 << ',' << bins[static_cast<std::size_t>(i)] << '\n';
      write_file(*flags.plot_dir + "/residual_histogram.csv", hist.str());
    }
    err << "max adjoint residual " << max_residual << " (threshold " << flags.threshold << ")\n";
    out << path << '\n';
    return all_pass ? kExitOk : kExitToleranceNotMet;
  });
}

int cmd_oracle(const std::string& problem_path, const OracleFlags& flags, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const ProblemConfig config = load_problem_file(problem_path);
    const ProblemSpec& spec = config.spec;
    if (flags.riccati.empty() == flags.brute.empty()) {
      throw ArgumentError("exactly one of --riccati or --brute is required");
    }
    const std::string path = flags.out.value_or(default_out(problem_path, ".oracle.csv"));
    std::ostringstream os;
    if (!flags.riccati.empty()) {
      auto kv = key_values(flags.riccati, "--riccati");
      std::map<std::string, double> coef{{"a", 0.0}, {"b", 1.0}, {"q", 1.0}, {"r", 1.0}};
      for (const auto& [k, v] : kv) {
        if (!coef.count(k)) throw ArgumentError("--riccati: unknown coefficient '" + k + "'");
        coef[k] = flag_number(v, k);
      }
      if (spec.n != 1) throw ArgumentError("--riccati needs a scalar problem (n = 1)");
      const double cost =
          riccati_lq_cost(coef["a"], coef["b"], coef["q"], coef["r"], spec.horizon, spec.x0(0));
      os << "method,cost\nriccati," << csv::format_double(cost) << '\n';
      err << "riccati cost " << cost << '\n';
    } else {
      auto kv = key_values(flags.brute, "--brute");
      std::vector<double> levels;
      int segments = 1;
      int steps = 50;
      for (const auto& [k, v] : kv) {
        if (k == "levels") {
          for (const std::string& cell : csv::split(v)) levels.push_back(flag_number(cell, k));
        } else if (k == "segments") {
          segments = static_cast<int>(flag_number(v, k));
        } else if (k == "steps") {
          steps = static_cast<int>(flag_number(v, k));
        } else {
          throw ArgumentError("--brute: unknown key '" + k + "'");
        }
      }
      const BruteForceResult best = brute_force_cost(spec, levels, segments, steps);
      os << "segment,t_start,t_end";
      for (int j = 1; j <= spec.m; ++j) os << ",u" << j;
      os << ",cost\n";
      const auto& bp = best.best_control.breakpoints();
      for (int s = 0; s < best.best_control.segments(); ++s) {
        os << s << ',' << csv::format_double(bp[static_cast<std::size_t>(s)]) << ','
           << csv::format_double(bp[static_cast<std::size_t>(s) + 1]);
        for (int j = 0; j < spec.m; ++j) {
          os << ',' << csv::format_double(best.best_control.values()[static_cast<std::size_t>(s)](j));
        }
        os << ',' << csv::format_double(best.best_cost) << '\n';
      }
      err << "brute-force best cost " << best.best_cost << " over " << best.candidates
          << " candidates\n";
    }
    write_file(path, os.str());
    out << path << '\n';
    return kExitOk;
  });
}

}  // namespace okoc
