#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "slfforge/slfforge.hpp"

namespace {

using namespace slfforge;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitUsage = 2;

Vector parse_point(const std::vector<double>& xs) {
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

double env_epsilon() {
  if (const char* s = std::getenv("SLFFORGE_EPS")) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !(v > 0.0)) {
      throw ContractViolation(std::string("SLFFORGE_EPS must be a positive number, got '") +
                              s + "'");
    }
    return v;
  }
  return default_epsilon();
}

struct StartOptions {
  std::vector<double> x0;
  std::vector<double> y0;

  void add(CLI::App* cmd) {
    cmd->add_option("--x0", x0, "Starting q1 (defaults to the registered start)")
        ->delimiter(',');
    cmd->add_option("--y0", y0, "Starting multiplier q2")->delimiter(',');
  }
  std::pair<Vector, Vector> resolve(const ProblemSpec& p) const {
    Vector q1 = x0.empty() ? p.start_q1 : parse_point(x0);
    Vector q2 = y0.empty() ? p.start_q2 : parse_point(y0);
    detail::require_size(q1.size(), p.n, "--x0");
    detail::require_size(q2.size(), p.m, "--y0");
    return {q1, q2};
  }
};

struct SolveOptions {
  std::string problem;
  std::string recipe = "gradient";
  std::optional<double> epsilon;
  int max_iter = 10000;
  double delta = 1.0;
  std::string trace_path;
  std::string trace_level;
  std::string rate = "linear";
  double kappa = 1.0;
  double alpha = 0.5;
  double coupling = 1.0;
  bool no_lift = false;
  StartOptions start;
};

GeneratorConfig make_config(const SolveOptions& o) {
  GeneratorConfig cfg;
  cfg.recipe = recipe_from_string(o.recipe);
  cfg.epsilon = o.epsilon ? *o.epsilon : env_epsilon();
  cfg.max_iter = o.max_iter;
  cfg.delta = o.delta;
  cfg.trace_level = o.trace_level.empty()
                        ? (o.trace_path.empty() ? TraceLevel::summary : TraceLevel::full)
                        : trace_level_from_string(o.trace_level);
  if (o.rate == "linear") {
    cfg.accel.rate.kind = RateKind::linear;
  } else if (o.rate == "bhat_bernstein") {
    cfg.accel.rate.kind = RateKind::bhat_bernstein;
  } else {
    throw ContractViolation("unknown rate '" + o.rate + "'");
  }
  cfg.accel.rate.kappa = o.kappa;
  cfg.accel.rate.alpha = o.alpha;
  cfg.accel.coupling = o.coupling;
  cfg.accel.lift = !o.no_lift;
  return cfg;
}

int solve_cmd(const SolveOptions& o) {
  const ProblemSpec p = load_problem(o.problem);
  const GeneratorConfig cfg = make_config(o);
  const auto [q1, q2] = o.start.resolve(p);
  const Trace t = cfg.recipe == Recipe::accelerated ? accel_run(p, cfg, q1)
                                                     : run(p, cfg, q1, q2);
  if (!o.trace_path.empty()) {
    std::ofstream out(o.trace_path);
    if (!out) throw ContractViolation("cannot write trace to '" + o.trace_path + "'");
    write_trace_jsonl(out, t);
  }
  std::cout << summary_json(t).dump(2) << '\n';
  return t.converged() ? kExitOk : kExitNotConverged;
}

int list_cmd() {
  json arr = json::array();
  for (const auto& name : registry_names()) {
    const CorpusEntry e = corpus_entry(name);
    arr.push_back({{"name", name},
                   {"description", e.spec.description},
                   {"n", e.spec.n},
                   {"m", e.spec.m},
                   {"is_equality_only", e.spec.is_equality_only},
                   {"is_lp", e.spec.is_lp},
                   {"is_quadratic", e.spec.is_quadratic},
                   {"start_q1", vector_json(e.spec.start_q1)},
                   {"kkt_q1", vector_json(e.kkt_q1)},
                   {"kkt_q2", vector_json(e.kkt_q2)},
                   {"certified_recipes", e.certified_recipes}});
  }
  std::cout << arr.dump(2) << '\n';
  return kExitOk;
}

int validate_cmd(const std::string& problem, double delta, const StartOptions& start) {
  const ProblemSpec p = load_problem(problem);
  const Vector q1 = start.resolve(p).first;
  const DerivativeReport rep = validate_derivatives(p, q1, delta);
  json j = derivative_json(rep);
  j["problem"] = p.name;
  j["delta"] = delta;
  j["q1"] = vector_json(q1);
  std::cout << j.dump(2) << '\n';
  return rep.passed ? kExitOk : kExitNotConverged;
}

int analyze_cmd(const std::string& problem, const StartOptions& start) {
  const ProblemSpec p = load_problem(problem);
  const auto [q1, q2] = start.resolve(p);
  const SpectralReport rep = analyze(p, init_state(p, q1, q2));
  json j = spectral_json(rep);
  j["problem"] = p.name;
  j["q1"] = vector_json(q1);
  j["q2"] = vector_json(q2);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int demo_cmd(const std::string& problem, int steps, double dt) {
  const ProblemSpec p = load_problem(problem);
  const FlowReport rep =
      p.is_lp ? lp_divergence_demo(p, steps, dt) : ahu_flow_demo(p, steps, dt);
  json j = flow_json(rep);
  j["problem"] = p.name;
  j["is_lp"] = p.is_lp;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int bench_cmd(std::vector<std::string> problems, const std::vector<std::string>& recipes,
              const SolveOptions& base, const std::string& out_path, unsigned jobs) {
  if (problems.empty()) problems = registry_names();
  if (recipes.empty()) throw ContractViolation("bench: empty recipe selection");

  struct Job {
    ProblemSpec problem;
    GeneratorConfig cfg;
  };
  std::vector<Job> work;
  for (const auto& name : problems) {
    const ProblemSpec p = load_problem(name);
    for (const auto& r : recipes) {
      SolveOptions o = base;
      o.recipe = r;
      o.trace_level = "none";
      GeneratorConfig cfg = make_config(o);
      try {
        check_recipe_compatible(p, cfg.recipe);
      } catch (const IncompatibleRecipe& e) {
        std::cerr << "skipping " << p.name << " x " << r << ": " << e.what() << '\n';
        continue;
      }
      work.push_back({p, cfg});
    }
  }
  if (work.empty()) throw ContractViolation("bench: no compatible (problem, recipe) pair");

  std::vector<BenchRow> rows(work.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::string first_error;
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        const auto& w = work[i];
        const Trace t = w.cfg.recipe == Recipe::accelerated
                            ? accel_run(w.problem, w.cfg, w.problem.start_q1)
                            : run(w.problem, w.cfg);
        rows[i] = {w.problem.name,
                   {t.recipe, t.outcome, t.iterations, t.final_S, t.final_residual.total,
                    t.evals, t.seconds, t.cost_increased}};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < std::min<std::size_t>(jobs, work.size()); ++i) {
    pool.emplace_back(worker);
  }
  for (auto& th : pool) th.join();
  if (!first_error.empty()) throw Error(first_error);

  if (out_path.empty()) {
    write_bench_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    if (!out) throw ContractViolation("cannot write '" + out_path + "'");
    write_bench_csv(out, rows);
  }
  return kExitOk;
}

void add_solver_options(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--epsilon", o.epsilon, "Stopping tolerance on S (default: SLFFORGE_EPS or sqrt(machine eps))")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", o.delta, "Control-set radius")->check(CLI::PositiveNumber);
  cmd->add_option("--rate", o.rate, "Accelerated rate function")
      ->check(CLI::IsMember({"linear", "bhat_bernstein"}));
  cmd->add_option("--kappa", o.kappa, "Accelerated rate gain")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", o.alpha, "Bhat-Bernstein exponent in (0, 1)");
  cmd->add_option("--coupling", o.coupling, "Velocity SLF coupling k");
  cmd->add_flag("--no-lift", o.no_lift, "Accelerated recipe with the lift disabled");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse-optimal algorithm generator driven by search Lyapunov functions"};
  app.require_subcommand(1);

  SolveOptions solve;
  auto* solve_app = app.add_subcommand("solve", "Run the generator loop on one problem");
  solve_app->add_option("--problem", solve.problem, "Registry name or problem file")->required();
  solve_app->add_option("--recipe", solve.recipe, "Algorithm recipe")
      ->check(CLI::IsMember({"gradient", "sqp", "ahu", "sign_gradient", "accelerated"}));
  solve_app->add_option("--trace", solve.trace_path, "Write a JSONL trace to this path");
  solve_app->add_option("--trace-level", solve.trace_level, "none, summary or full")
      ->check(CLI::IsMember({"none", "summary", "full"}));
  add_solver_options(solve_app, solve);
  solve.start.add(solve_app);

  auto* list_app = app.add_subcommand("list", "List the registered problems");

  std::string val_problem;
  double val_delta = 1e-6;
  StartOptions val_start;
  auto* val_app = app.add_subcommand("validate", "Check analytic derivatives against central differences");
  val_app->add_option("--problem", val_problem, "Registry name or problem file")->required();
  val_app->add_option("--delta", val_delta, "Finite-difference step")->check(CLI::PositiveNumber);
  val_start.add(val_app);

  std::string an_problem;
  StartOptions an_start;
  auto* an_app = app.add_subcommand("analyze", "Spectral report for K_A at a point");
  an_app->add_option("--problem", an_problem, "Registry name or problem file")->required();
  an_start.add(an_app);

  std::string demo_problem;
  int demo_steps = 10000;
  double demo_dt = 1e-3;
  auto* demo_app = app.add_subcommand("demo-ahu", "Integrate the AHU residual flow on a quadratic problem");
  demo_app->add_option("--problem", demo_problem, "Registry name or problem file")->required();
  demo_app->add_option("--steps", demo_steps, "Number of RK4 steps")->check(CLI::PositiveNumber);
  demo_app->add_option("--dt", demo_dt, "Step length")->check(CLI::PositiveNumber);

  std::vector<std::string> bench_problems;
  std::vector<std::string> bench_recipes{"gradient", "sqp"};
  std::string bench_out;
  unsigned bench_jobs = 0;
  SolveOptions bench_base;
  auto* bench_app = app.add_subcommand("bench", "Compare recipes across problems (CSV)");
  bench_app->add_option("--problems", bench_problems, "Problems (default: whole corpus)")
      ->delimiter(',');
  bench_app->add_option("--recipes", bench_recipes, "Recipes")
      ->delimiter(',')
      ->check(CLI::IsMember({"gradient", "sqp", "ahu", "sign_gradient", "accelerated"}));
  bench_app->add_option("--out", bench_out, "CSV output path (default: stdout)");
  bench_app->add_option("--jobs", bench_jobs, "Worker threads (default: hardware)");
  add_solver_options(bench_app, bench_base);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_app) return solve_cmd(solve);
    if (*list_app) return list_cmd();
    if (*val_app) return validate_cmd(val_problem, val_delta, val_start);
    if (*an_app) return analyze_cmd(an_problem, an_start);
    if (*demo_app) return demo_cmd(demo_problem, demo_steps, demo_dt);
    if (*bench_app) {
      if (bench_recipes.empty()) {
        std::cerr << "error: bench needs at least one recipe\n";
        return kExitUsage;
      }
      return bench_cmd(bench_problems, bench_recipes, bench_base, bench_out, bench_jobs);
    }
  } catch (const ProblemLoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IncompatibleRecipe& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  }
  return kExitUsage;
}
