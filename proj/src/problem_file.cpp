#include "okoc/problem_file.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "okoc/errors.hpp"

namespace okoc {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& required,
                const std::set<std::string>& optional) {
  if (!obj.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) {
      throw SchemaError(child(path, key), "unknown key");
    }
  }
  for (const std::string& key : required) {
    if (!obj.contains(key)) throw SchemaError(child(path, key), "missing required key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) throw SchemaError(path, "expected a positive number");
  return v;
}

long long get_integer(const json& j, const std::string& path, long long min_value) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < min_value) throw SchemaError(path, "must be >= " + std::to_string(min_value));
  return v;
}

Eigen::VectorXd get_vector(const json& j, const std::string& path, Eigen::Index size) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  if (static_cast<Eigen::Index>(j.size()) != size) {
    throw SchemaError(path, "expected " + std::to_string(size) + " entries, got " +
                                std::to_string(j.size()));
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = get_number(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
  }
  return v;
}

Box get_box(const json& j, const std::string& path, int dim) {
  check_keys(j, path, {"lower", "upper"}, {});
  Eigen::VectorXd lo = get_vector(j["lower"], child(path, "lower"), dim);
  Eigen::VectorXd hi = get_vector(j["upper"], child(path, "upper"), dim);
  for (int i = 0; i < dim; ++i) {
    if (!(lo(i) < hi(i))) {
      throw SchemaError(path, "lower must be strictly below upper in coordinate " +
                                  std::to_string(i + 1));
    }
  }
  return Box(std::move(lo), std::move(hi));
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

Expr get_expr(const json& j, const std::string& path, int n, int m) {
  const std::string text = get_string(j, path);
  try {
    return parse(text, n, m);
  } catch (const ParseError& e) {
    throw ExpressionError(path, e.what());
  } catch (const SemanticError& e) {
    throw ExpressionError(path, e.what());
  }
}

json box_json(const Box& b) {
  return {{"lower", std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size())},
          {"upper", std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size())}};
}

KernelConfig get_kernel(const json* j, const std::string& path, KernelFamily default_family,
                        const Box& box, json& echo) {
  KernelFamily family = default_family;
  std::optional<double> shape;
  double radius = 0.0;  // 0 = unset
  if (j) {
    check_keys(*j, path, {}, {"family", "shape", "support_radius"});
    if (j->contains("family")) {
      const std::string name = get_string((*j)["family"], child(path, "family"));
      const auto parsed = parse_kernel_family(name);
      if (!parsed) {
        throw SchemaError(child(path, "family"),
                          "unknown kernel family '" + name +
                              "' (expected gaussian, wendland_c2 or wendland_c4)");
      }
      family = *parsed;
    }
    if (j->contains("shape")) shape = get_positive((*j)["shape"], child(path, "shape"));
    if (j->contains("support_radius")) {
      radius = get_positive((*j)["support_radius"], child(path, "support_radius"));
    }
  }
  if (family == KernelFamily::Gaussian) {
    if (!shape) shape = median_sq_distance(box);
    radius = 0.0;
  } else {
    if (radius == 0.0) radius = 2.0 * std::sqrt(median_sq_distance(box));
    if (!shape) shape = 1.0;
  }
  echo = {{"family", std::string(to_string(family))}, {"shape", *shape}};
  if (radius > 0.0) echo["support_radius"] = radius;
  return KernelConfig(family, *shape, radius > 0.0 ? radius : 1.0, box.dim());
}

}  // namespace

ProblemConfig load_problem(const json& doc) {
  check_keys(doc, "",
             {"n", "m", "T", "x0", "X", "dynamics", "running_cost", "terminal_cost"},
             {"U", "D", "kernel", "centers", "solver"});
  ProblemConfig cfg;
  ProblemSpec& spec = cfg.spec;
  spec.n = static_cast<int>(get_integer(doc["n"], "/n", 1));
  spec.m = static_cast<int>(get_integer(doc["m"], "/m", 0));
  spec.horizon = get_positive(doc["T"], "/T");
  spec.x0 = get_vector(doc["x0"], "/x0", spec.n);
  spec.X = get_box(doc["X"], "/X", spec.n);
  if (doc.contains("U")) {
    spec.U = get_box(doc["U"], "/U", spec.m);
  } else if (spec.m > 0) {
    throw SchemaError("/U", "missing required key (m > 0)");
  } else {
    spec.U = Box(Eigen::VectorXd(0), Eigen::VectorXd(0));
  }
  spec.D = doc.contains("D") ? get_box(doc["D"], "/D", spec.n) : spec.X;
  if (!spec.X.contains(spec.x0)) throw SchemaError("/x0", "x0 must lie inside X");

  const json& dyn = doc["dynamics"];
  if (!dyn.is_array() || static_cast<int>(dyn.size()) != spec.n) {
    throw SchemaError("/dynamics", "expected an array of n expression strings");
  }
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    spec.dynamics.push_back(get_expr(dyn[i], "/dynamics/" + std::to_string(i), spec.n, spec.m));
  }
  spec.running_cost = get_expr(doc["running_cost"], "/running_cost", spec.n, spec.m);
  spec.terminal_cost = get_expr(doc["terminal_cost"], "/terminal_cost", spec.n, 0);

  json kernel_echo = json::object();
  const json* kernels = nullptr;
  if (doc.contains("kernel")) {
    kernels = &doc["kernel"];
    check_keys(*kernels, "/kernel", {}, {"S", "Sigma", "D"});
  }
  auto sub = [&](const char* key) -> const json* {
    return kernels && kernels->contains(key) ? &(*kernels)[key] : nullptr;
  };
  spec.kernel_S = get_kernel(sub("S"), "/kernel/S", KernelFamily::Gaussian, spec.s_box(),
                             kernel_echo["S"]);
  spec.kernel_Sigma = get_kernel(sub("Sigma"), "/kernel/Sigma", KernelFamily::WendlandC4,
                                 spec.sigma_box(), kernel_echo["Sigma"]);
  spec.kernel_D = get_kernel(sub("D"), "/kernel/D", KernelFamily::Gaussian, spec.D,
                             kernel_echo["D"]);

  CenterParams& cp = cfg.centers;
  if (doc.contains("centers")) {
    const json& c = doc["centers"];
    check_keys(c, "/centers", {}, {"M_S", "M_D", "M_b", "strategy", "seed"});
    if (c.contains("M_S")) cp.M_S = static_cast<int>(get_integer(c["M_S"], "/centers/M_S", 1));
    if (c.contains("M_D")) cp.M_D = static_cast<int>(get_integer(c["M_D"], "/centers/M_D", 1));
    cp.M_b = static_cast<int>(std::lround((cp.M_S + cp.M_D) / 3.0));
    if (c.contains("M_b")) cp.M_b = static_cast<int>(get_integer(c["M_b"], "/centers/M_b", 1));
    if (c.contains("strategy")) {
      const std::string s = get_string(c["strategy"], "/centers/strategy");
      if (s == "halton") {
        cp.strategy = CenterStrategy::Halton;
      } else if (s == "grid") {
        cp.strategy = CenterStrategy::Grid;
      } else {
        throw SchemaError("/centers/strategy", "expected 'halton' or 'grid'");
      }
    }
    if (c.contains("seed")) {
      cp.seed = static_cast<std::uint64_t>(get_integer(c["seed"], "/centers/seed", 0));
    }
  } else {
    cp.M_b = static_cast<int>(std::lround((cp.M_S + cp.M_D) / 3.0));
  }
  if (cp.M_b > cp.M_S + cp.M_D) throw SchemaError("/centers/M_b", "must not exceed M_S + M_D");

  SolveOptions& so = cfg.solver;
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, "/solver", {},
               {"eq_tol", "stat_tol", "max_iters", "penalty_init", "penalty_growth"});
    if (s.contains("eq_tol")) so.eq_tol = get_positive(s["eq_tol"], "/solver/eq_tol");
    if (s.contains("stat_tol")) so.stat_tol = get_positive(s["stat_tol"], "/solver/stat_tol");
    if (s.contains("max_iters")) {
      so.max_iters = static_cast<int>(get_integer(s["max_iters"], "/solver/max_iters", 1));
    }
    if (s.contains("penalty_init")) {
      so.penalty_init = get_positive(s["penalty_init"], "/solver/penalty_init");
    }
    if (s.contains("penalty_growth")) {
      so.penalty_growth = get_number(s["penalty_growth"], "/solver/penalty_growth");
      if (!(so.penalty_growth > 1.0)) throw SchemaError("/solver/penalty_growth", "must exceed 1");
    }
  }

  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw SchemaError("/", e.what());
  }

  json& r = cfg.resolved;
  r["n"] = spec.n;
  r["m"] = spec.m;
  r["T"] = spec.horizon;
  r["x0"] = std::vector<double>(spec.x0.data(), spec.x0.data() + spec.n);
  r["X"] = box_json(spec.X);
  if (spec.m > 0) r["U"] = box_json(spec.U);
  r["D"] = box_json(spec.D);
  r["dynamics"] = doc["dynamics"];
  r["running_cost"] = doc["running_cost"];
  r["terminal_cost"] = doc["terminal_cost"];
  r["kernel"] = kernel_echo;
  r["centers"] = {{"M_S", cp.M_S},
                  {"M_D", cp.M_D},
                  {"M_b", cp.M_b},
                  {"strategy", std::string(to_string(cp.strategy))},
                  {"seed", cp.seed}};
  r["solver"] = {{"eq_tol", so.eq_tol},
                 {"stat_tol", so.stat_tol},
                 {"max_iters", so.max_iters},
                 {"penalty_init", so.penalty_init},
                 {"penalty_growth", so.penalty_growth}};
  return cfg;
}

ProblemConfig load_problem_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line:col
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError("line " + std::to_string(line) + ":" + std::to_string(col),
                      "invalid JSON");
  }
  return load_problem(doc);
}

ProblemConfig load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open problem file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_problem_text(ss.str());
}

void override_seed(ProblemConfig& config, std::uint64_t seed) {
  config.centers.seed = seed;
  config.resolved["centers"]["seed"] = seed;
}

}  // namespace okoc
