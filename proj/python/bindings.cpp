#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slfforge/slfforge.hpp"

namespace py = pybind11;
using namespace slfforge;

namespace {

SlfKind slf_kind_from(const std::string& s) {
  if (s == "quadratic_residual") return SlfKind::quadratic_residual;
  if (s == "l1_gradient") return SlfKind::l1_gradient;
  if (s == "velocity_augmented") return SlfKind::velocity_augmented;
  throw ContractViolation("unknown SLF kind '" + s + "'");
}

GeneratorConfig make_config(const std::string& recipe, std::optional<double> epsilon,
                            int max_iter, double delta, const std::string& rate,
                            double kappa, double alpha, double coupling, bool lift,
                            const std::string& trace_level) {
  GeneratorConfig cfg;
  cfg.recipe = recipe_from_string(recipe);
  if (epsilon) cfg.epsilon = *epsilon;
  cfg.max_iter = max_iter;
  cfg.delta = delta;
  cfg.trace_level = trace_level_from_string(trace_level);
  if (rate == "linear") {
    cfg.accel.rate.kind = RateKind::linear;
  } else if (rate == "bhat_bernstein") {
    cfg.accel.rate.kind = RateKind::bhat_bernstein;
  } else {
    throw ContractViolation("unknown rate '" + rate + "'");
  }
  cfg.accel.rate.kappa = kappa;
  cfg.accel.rate.alpha = alpha;
  cfg.accel.coupling = coupling;
  cfg.accel.lift = lift;
  return cfg;
}

py::dict residual_dict(const TargetResidual& r) {
  py::dict d;
  d["grad_norm"] = r.grad_norm;
  d["bound_violation"] = r.bound_violation;
  d["comp_violation"] = r.comp_violation;
  d["total"] = r.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Search-Lyapunov-function algorithm generator";

  static py::exception<Error> base_exc(m, "Error", PyExc_RuntimeError);
  py::register_exception<ContractViolation>(m, "ContractViolation", base_exc.ptr());
  py::register_exception<EvaluationError>(m, "EvaluationError", base_exc.ptr());
  py::register_exception<NormalizationError>(m, "NormalizationError", base_exc.ptr());
  py::register_exception<ProblemLoadError>(m, "ProblemLoadError", base_exc.ptr());
  py::register_exception<IncompatibleRecipe>(m, "IncompatibleRecipe", base_exc.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base_exc.ptr());
  py::register_exception<GuidabilityFailure>(m, "GuidabilityFailure", base_exc.ptr());
  py::register_exception<LineFailure>(m, "LineFailure", base_exc.ptr());
  py::register_exception<DescentFailure>(m, "DescentFailure", base_exc.ptr());

  py::class_<ProblemSpec>(m, "Problem")
      .def_readonly("name", &ProblemSpec::name)
      .def_readonly("description", &ProblemSpec::description)
      .def_readonly("n", &ProblemSpec::n)
      .def_readonly("m", &ProblemSpec::m)
      .def_readonly("lower", &ProblemSpec::lower)
      .def_readonly("upper", &ProblemSpec::upper)
      .def_readonly("is_equality_only", &ProblemSpec::is_equality_only)
      .def_readonly("is_lp", &ProblemSpec::is_lp)
      .def_readonly("is_quadratic", &ProblemSpec::is_quadratic)
      .def_readonly("start_q1", &ProblemSpec::start_q1)
      .def_readonly("start_q2", &ProblemSpec::start_q2)
      .def("__repr__", [](const ProblemSpec& p) {
        return "<Problem " + p.name + " n=" + std::to_string(p.n) +
               " m=" + std::to_string(p.m) + ">";
      });

  py::class_<LiftedState>(m, "LiftedState")
      .def_readwrite("q0", &LiftedState::q0)
      .def_readwrite("q1", &LiftedState::q1)
      .def_readwrite("q2", &LiftedState::q2)
      .def_readwrite("q3", &LiftedState::q3)
      .def_readwrite("q4", &LiftedState::q4)
      .def_readwrite("q5", &LiftedState::q5)
      .def_readwrite("v1", &LiftedState::v1);

  py::class_<ControlVector>(m, "ControlVector")
      .def(py::init([](const Vector& u1, const Vector& u2) {
             return ControlVector{0.0, u1, u2};
           }),
           py::arg("u1"), py::arg("u2") = Vector(0))
      .def_readwrite("u0", &ControlVector::u0)
      .def_readwrite("u1", &ControlVector::u1)
      .def_readwrite("u2", &ControlVector::u2);

  py::class_<DirectionResult>(m, "DirectionResult")
      .def_readonly("u", &DirectionResult::u)
      .def_readonly("ds", &DirectionResult::ds)
      .def_readonly("sigma", &DirectionResult::sigma)
      .def_readonly("metric_rcond", &DirectionResult::metric_rcond)
      .def_readonly("recipe", &DirectionResult::recipe)
      .def_readonly("regularized", &DirectionResult::regularized);

  py::class_<JumpResult>(m, "JumpResult")
      .def_readonly("h", &JumpResult::h)
      .def_readonly("q_next", &JumpResult::q_next)
      .def_readonly("s_next", &JumpResult::s_next)
      .def_readonly("evals", &JumpResult::evals)
      .def_property_readonly("mode", [](const JumpResult& r) { return to_string(r.mode); });

  py::class_<IterateRecord>(m, "IterateRecord")
      .def_readonly("k", &IterateRecord::k)
      .def_readonly("q", &IterateRecord::q)
      .def_readonly("u", &IterateRecord::u)
      .def_readonly("h", &IterateRecord::h)
      .def_readonly("S", &IterateRecord::S)
      .def_readonly("DS", &IterateRecord::DS)
      .def_readonly("hypersurface", &IterateRecord::hypersurface)
      .def_property_readonly("residual",
                             [](const IterateRecord& r) { return residual_dict(r.residual); });

  py::class_<Trace>(m, "Trace")
      .def_readonly("problem", &Trace::problem)
      .def_readonly("recipe", &Trace::recipe)
      .def_property_readonly("outcome", [](const Trace& t) { return to_string(t.outcome); })
      .def_readonly("detail", &Trace::detail)
      .def_readonly("advisories", &Trace::advisories)
      .def_readonly("records", &Trace::records)
      .def_readonly("final_state", &Trace::final_state)
      .def_readonly("iterations", &Trace::iterations)
      .def_readonly("final_S", &Trace::final_S)
      .def_readonly("evals", &Trace::evals)
      .def_readonly("seconds", &Trace::seconds)
      .def_readonly("cost_increased", &Trace::cost_increased)
      .def_property_readonly("final_residual",
                             [](const Trace& t) { return residual_dict(t.final_residual); })
      .def_property_readonly("converged", &Trace::converged)
      .def("summary_json", [](const Trace& t) { return summary_json(t).dump(); })
      .def("trace_jsonl", [](const Trace& t) {
        std::ostringstream os;
        write_trace_jsonl(os, t);
        return os.str();
      });

  py::class_<SpectralReport>(m, "SpectralReport")
      .def_readonly("eigenvalues", &SpectralReport::eigenvalues)
      .def_readonly("positive_stable", &SpectralReport::positive_stable)
      .def_readonly("all_real_positive", &SpectralReport::all_real_positive)
      .def_readonly("benzi_simoncini_holds", &SpectralReport::benzi_simoncini_holds)
      .def_readonly("full_row_rank", &SpectralReport::full_row_rank)
      .def_readonly("lambda_min", &SpectralReport::lambda_min)
      .def_readonly("schur_norm", &SpectralReport::schur_norm)
      .def_readonly("reason", &SpectralReport::reason);

  py::class_<FlowReport>(m, "FlowReport")
      .def_readonly("steps", &FlowReport::steps)
      .def_readonly("dt", &FlowReport::dt)
      .def_readonly("initial_norm", &FlowReport::initial_norm)
      .def_readonly("final_norm", &FlowReport::final_norm)
      .def_readonly("min_relative", &FlowReport::min_relative)
      .def_readonly("final_relative", &FlowReport::final_relative);

  m.def("registry_names", &registry_names);
  m.def("load_problem", &load_problem, py::arg("source"));
  m.def("kkt_point", [](const std::string& name) {
    const CorpusEntry e = corpus_entry(name);
    return py::make_tuple(e.kkt_q1, e.kkt_q2);
  }, py::arg("name"));
  m.def("quadratic_problem", &make_quadratic_problem, py::arg("name"), py::arg("Q"),
        py::arg("c"), py::arg("A"), py::arg("b"), py::arg("gL"), py::arg("gU"));
  m.def(
      "unconstrained_problem",
      [](const std::string& name, int n, std::function<double(const Vector&)> f,
         std::function<Vector(const Vector&)> g, std::function<Matrix(const Vector&)> h,
         std::optional<Vector> start) {
        ProblemSpec p;
        p.name = name;
        p.n = n;
        p.cost = std::move(f);
        p.cost_grad = std::move(g);
        p.cost_hess = std::move(h);
        if (start) p.start_q1 = *start;
        p.finalize();
        return p;
      },
      py::arg("name"), py::arg("n"), py::arg("cost"), py::arg("grad"), py::arg("hess"),
      py::arg("start") = py::none());

  m.def("init_state", &init_state, py::arg("problem"), py::arg("q1"), py::arg("q2"),
        py::arg("accelerated") = false);
  m.def("restore_to_surface", &restore_to_surface, py::arg("problem"), py::arg("q0"),
        py::arg("q1"), py::arg("q2"), py::arg("v1") = std::nullopt);
  m.def("hypersurface_residual", &hypersurface_residual);
  m.def("target_residual", [](const ProblemSpec& p, const LiftedState& q) {
    return residual_dict(target_residual(p, q));
  });
  m.def("lagrangian_grad", &lagrangian_grad);
  m.def("lagrangian_hess", &lagrangian_hess);
  m.def("validate_derivatives", [](const ProblemSpec& p, const Vector& q1, double delta) {
    const DerivativeReport r = validate_derivatives(p, q1, delta);
    py::dict d;
    d["max_error"] = r.max_error;
    d["threshold"] = r.threshold;
    d["passed"] = r.passed;
    return d;
  }, py::arg("problem"), py::arg("q1"), py::arg("delta") = 1e-6);
  m.def("eval_field_q3", [](const ProblemSpec& p, const LiftedState& q, const ControlVector& u) {
    return eval_field(p, q, u).q3;
  });
  m.def("assemble_kkt", &assemble_kkt, py::arg("problem"), py::arg("state"),
        py::arg("symmetric") = false);
  m.def(
      "slf_value",
      [](const ProblemSpec& p, const LiftedState& q, const std::string& kind, double k) {
        return slf_value({slf_kind_from(kind), k}, p, q);
      },
      py::arg("problem"), py::arg("state"), py::arg("kind") = "quadratic_residual",
      py::arg("coupling") = 1.0);
  m.def(
      "direction",
      [](const ProblemSpec& p, const LiftedState& q, const std::string& recipe, double delta) {
        GeneratorConfig cfg;
        cfg.recipe = recipe_from_string(recipe);
        cfg.delta = delta;
        const RecipePair pair = recipe_pair(cfg);
        if (pair.control.kind == ControlSetKind::rate_constrained) {
          return accel_direction(p, q, cfg.accel);
        }
        return solve_direction_quadratic(pair.slf, pair.control, p, q);
      },
      py::arg("problem"), py::arg("state"), py::arg("recipe") = "gradient",
      py::arg("delta") = 1.0);
  m.def(
      "solve_jump",
      [](const ProblemSpec& p, const LiftedState& q, const ControlVector& u,
         const std::string& kind) {
        return solve_jump({slf_kind_from(kind), 1.0}, p, q, u);
      },
      py::arg("problem"), py::arg("state"), py::arg("u"),
      py::arg("kind") = "quadratic_residual");
  m.def(
      "run",
      [](const ProblemSpec& p, const std::string& recipe, std::optional<Vector> q1,
         std::optional<Vector> q2, std::optional<double> epsilon, int max_iter, double delta,
         const std::string& rate, double kappa, double alpha, double coupling, bool lift,
         const std::string& trace_level) {
        const GeneratorConfig cfg = make_config(recipe, epsilon, max_iter, delta, rate, kappa,
                                                alpha, coupling, lift, trace_level);
        const Vector x = q1 ? *q1 : p.start_q1;
        const Vector y = q2 ? *q2 : p.start_q2;
        py::gil_scoped_release release;
        if (cfg.recipe == Recipe::accelerated) return accel_run(p, cfg, x);
        return run(p, cfg, x, y);
      },
      py::arg("problem"), py::arg("recipe") = "gradient", py::arg("q1") = py::none(),
      py::arg("q2") = py::none(), py::arg("epsilon") = py::none(),
      py::arg("max_iter") = 10000, py::arg("delta") = 1.0, py::arg("rate") = "linear",
      py::arg("kappa") = 1.0, py::arg("alpha") = 0.5, py::arg("coupling") = 1.0,
      py::arg("lift") = true, py::arg("trace_level") = "full");
  m.def("analyze", &analyze, py::arg("problem"), py::arg("state"));
  m.def("analyze_matrices", &analyze_matrices, py::arg("H"), py::arg("J"));
  m.def("lp_divergence_demo", &lp_divergence_demo, py::arg("problem"),
        py::arg("steps") = 10000, py::arg("dt") = 1e-3);
  m.def("ahu_flow_demo", &ahu_flow_demo, py::arg("problem"), py::arg("steps") = 10000,
        py::arg("dt") = 1e-3);
}
