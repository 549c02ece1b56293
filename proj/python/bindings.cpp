#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "arclqn/arc.hpp"
#include "arclqn/dense_reference.hpp"
#include "arclqn/problems.hpp"
#include "arclqn/subproblem.hpp"

namespace py = pybind11;
using namespace arclqn;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cubic-regularized limited-memory SR1 optimization core";

  py::enum_<UpdateReason>(m, "UpdateReason")
      .value("ACCEPTED", UpdateReason::Accepted)
      .value("CURVATURE_SKIP", UpdateReason::CurvatureSkip)
      .value("DEGENERATE_SKIP", UpdateReason::DegenerateSkip)
      .value("RESET_TRIGGERED", UpdateReason::ResetTriggered);

  py::enum_<StepCase>(m, "StepCase")
      .value("INTERIOR", StepCase::Interior)
      .value("BOUNDARY_SADDLE", StepCase::BoundarySaddle)
      .value("HARD_CASE", StepCase::HardCase)
      .value("FAILED", StepCase::Failed);

  py::enum_<SolveMode>(m, "SolveMode")
      .value("NORM_TRICK", SolveMode::NormTrick)
      .value("NAIVE_LQN", SolveMode::NaiveLqn);

  py::enum_<CaseKind>(m, "CaseKind")
      .value("HARD", CaseKind::Hard)
      .value("INDEFINITE", CaseKind::Indefinite)
      .value("POSITIVE_DEFINITE", CaseKind::PositiveDefinite);

  py::class_<UpdateOutcome>(m, "UpdateOutcome")
      .def_readonly("accepted", &UpdateOutcome::accepted)
      .def_readonly("reason", &UpdateOutcome::reason);

  py::class_<LqnState>(m, "LqnState")
      .def(py::init<double, int>(), py::arg("gamma") = 1.0, py::arg("memory") = 5)
      .def_property_readonly("gamma", &LqnState::gamma)
      .def_property_readonly("memory", &LqnState::memory)
      .def_property_readonly("count", &LqnState::count)
      .def("set_gamma", &LqnState::set_gamma)
      .def("try_update", &LqnState::try_update, py::arg("s"), py::arg("y"),
           py::arg("eps_curv") = LqnState::kDefaultEpsCurv,
           py::arg("kappa") = LqnState::kDefaultKappa)
      .def("bmul", &LqnState::bmul)
      .def("model_value", &LqnState::model_value, py::arg("g"), py::arg("sigma"), py::arg("s"),
           py::arg("f0") = 0.0)
      .def("reset_trim", &LqnState::reset_trim);

  py::class_<ToleranceSet>(m, "ToleranceSet")
      .def(py::init<>())
      .def_readwrite("nu", &ToleranceSet::nu)
      .def_readwrite("eps_shift", &ToleranceSet::eps_shift)
      .def_readwrite("eps_hard", &ToleranceSet::eps_hard)
      .def_readwrite("max_newton", &ToleranceSet::max_newton)
      .def_static("training", &ToleranceSet::training)
      .def_static("verification", &ToleranceSet::verification);

  py::class_<SubproblemSolution>(m, "SubproblemSolution")
      .def_readonly("s_star", &SubproblemSolution::s_star)
      .def_readonly("lambda_star", &SubproblemSolution::lambda_star)
      .def_readonly("kind", &SubproblemSolution::kind)
      .def_readonly("newton_iters", &SubproblemSolution::newton_iters)
      .def_readonly("model_decrease", &SubproblemSolution::model_decrease)
      .def("failed", &SubproblemSolution::failed);

  m.def("solve_subproblem", &solve_subproblem, py::arg("state"), py::arg("g"), py::arg("sigma"),
        py::arg("tol") = ToleranceSet{}, py::arg("mode") = SolveMode::NormTrick);
  m.def(
      "cauchy_point",
      [](const LqnState& state, const Vector& g, double sigma, double f0) {
        const CauchyPoint cp = cauchy_point(state, g, sigma, f0);
        return py::make_tuple(cp.s, cp.model);
      },
      py::arg("state"), py::arg("g"), py::arg("sigma"), py::arg("f0") = 0.0);
  py::class_<DenseSolveOptions>(m, "DenseSolveOptions").def(py::init<>());
  m.def("dense_solve_subproblem", &dense_solve_subproblem, py::arg("b"), py::arg("g"),
        py::arg("sigma"), py::arg("options") = DenseSolveOptions{});

  py::class_<SubproblemCase>(m, "SubproblemCase")
      .def_readonly("kind", &SubproblemCase::kind)
      .def_readonly("state", &SubproblemCase::state)
      .def_readonly("g", &SubproblemCase::g)
      .def_readonly("sigma", &SubproblemCase::sigma)
      .def_readonly("seed", &SubproblemCase::seed);
  m.def("make_subproblem_case", &make_subproblem_case, py::arg("kind"), py::arg("n"),
        py::arg("m"), py::arg("seed"), py::arg("sigma") = 1.0);

  py::class_<Problem>(m, "Problem")
      .def_readonly("name", &Problem::name)
      .def_readonly("dim", &Problem::dim)
      .def_readonly("dataset_size", &Problem::dataset_size)
      .def("eval",
           [](const Problem& p, const Vector& x, const std::vector<int>& batch) {
             Vector g(p.dim);
             const double f = p.eval(x, batch, &g);
             return py::make_tuple(f, g);
           })
      .def("full_eval",
           [](const Problem& p, const Vector& x) {
             Vector g(p.dim);
             const double f = p.full_eval(x, &g);
             return py::make_tuple(f, g);
           })
      .def("default_start", &Problem::default_start);
  m.def("rosenbrock", &rosenbrock, py::arg("n"));
  m.def("quadratic", &quadratic, py::arg("n"), py::arg("condition") = 10.0);
  m.def("logistic_synth", &logistic_synth, py::arg("n_features"), py::arg("n_samples"),
        py::arg("seed"));

  py::enum_<Branch>(m, "Branch")
      .value("ACCEPTED", Branch::Accepted)
      .value("FALLBACK", Branch::Fallback)
      .value("FAILED", Branch::Failed);

  py::enum_<FallbackKind>(m, "FallbackKind")
      .value("SGD", FallbackKind::Sgd)
      .value("ADAM", FallbackKind::Adam);

  py::class_<ArcConfig>(m, "ArcConfig")
      .def(py::init<>())
      .def_readwrite("eta1", &ArcConfig::eta1)
      .def_readwrite("eta2", &ArcConfig::eta2)
      .def_readwrite("sigma0", &ArcConfig::sigma0)
      .def_readwrite("sigma_floor", &ArcConfig::sigma_floor)
      .def_readwrite("sigma_cap", &ArcConfig::sigma_cap)
      .def_readwrite("alpha1", &ArcConfig::alpha1)
      .def_readwrite("alpha2", &ArcConfig::alpha2)
      .def_readwrite("fallback", &ArcConfig::fallback)
      .def_readwrite("mu", &ArcConfig::mu)
      .def_readwrite("nu", &ArcConfig::nu)
      .def_readwrite("memory", &ArcConfig::memory)
      .def_readwrite("full_eval_every", &ArcConfig::full_eval_every)
      .def("to_json", [](const ArcConfig& cfg) { return config_to_json(cfg); })
      .def_static("from_json", &config_from_json);

  py::class_<StepReport>(m, "StepReport")
      .def_readonly("iter", &StepReport::iter)
      .def_readonly("branch", &StepReport::branch)
      .def_readonly("rho", &StepReport::rho)
      .def_readonly("sigma_after", &StepReport::sigma_after)
      .def_readonly("f_before", &StepReport::f_before)
      .def_readonly("f_after", &StepReport::f_after)
      .def_readonly("grad_norm", &StepReport::grad_norm)
      .def_readonly("grad_norm_inf", &StepReport::grad_norm_inf)
      .def_readonly("newton_iters", &StepReport::newton_iters)
      .def_readonly("subproblem_case", &StepReport::subproblem_case)
      .def_readonly("f_full", &StepReport::f_full);

  py::class_<Trace>(m, "Trace")
      .def_readonly("steps", &Trace::steps)
      .def_readonly("x_final", &Trace::x_final)
      .def_readonly("aborted", &Trace::aborted)
      .def_readonly("abort_reason", &Trace::abort_reason);

  m.def(
      "arc_run",
      [](const Vector& x0, const ArcConfig& cfg, const Problem& problem, long max_iters,
         std::uint64_t seed, int batch_size, double max_seconds, double grad_tol_inf) {
        RunBudget budget;
        budget.max_iters = max_iters;
        budget.max_seconds = max_seconds;
        budget.grad_tol_inf = grad_tol_inf;
        return arc_run(x0, cfg, problem, budget, seed, batch_size);
      },
      py::arg("x0"), py::arg("config"), py::arg("problem"), py::arg("max_iters"),
      py::arg("seed") = 0, py::arg("batch_size") = 0, py::arg("max_seconds") = 0.0,
      py::arg("grad_tol_inf") = 0.0);
}
