#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "algd/energy.hpp"
#include "algd/env.hpp"
#include "algd/rng.hpp"
#include "algd/schedule.hpp"
#include "algd/score.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_algd, m) {
  m.doc() = "core operations: rng, noise schedule, environments, Lagrangian "
            "energies, and guided-score estimators";

  py::class_<algd::RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id"))
      .def("next_u64", &algd::RngStream::next_u64)
      .def("uniform01", &algd::RngStream::uniform01)
      .def("uniform_in", &algd::RngStream::uniform_in, py::arg("lo"), py::arg("hi"))
      .def("normal", &algd::RngStream::normal)
      .def("index", &algd::RngStream::index, py::arg("n"))
      .def_property_readonly("seed", &algd::RngStream::seed)
      .def_property_readonly("stream_id", &algd::RngStream::stream_id);

  py::class_<algd::NoiseSchedule>(m, "NoiseSchedule")
      .def_readonly("K", &algd::NoiseSchedule::K)
      .def_readonly("sigma", &algd::NoiseSchedule::sigma)
      .def_readonly("dsq", &algd::NoiseSchedule::dsq)
      .def("sigma_at", &algd::NoiseSchedule::sigma_at, py::arg("tau"))
      .def("dsq_at", &algd::NoiseSchedule::dsq_at, py::arg("tau"));
  m.def("build_schedule", &algd::build_schedule, py::arg("K"), py::arg("sigma_min"),
        py::arg("sigma_max"));
  m.def("forward_perturb", &algd::forward_perturb, py::arg("a0"), py::arg("tau"), py::arg("sch"),
        py::arg("rng"));

  py::class_<algd::EnvSpec>(m, "EnvSpec")
      .def_readonly("name", &algd::EnvSpec::name)
      .def_readonly("d_s", &algd::EnvSpec::d_s)
      .def_readonly("d_a", &algd::EnvSpec::d_a)
      .def_readwrite("dt", &algd::EnvSpec::dt)
      .def_readwrite("horizon", &algd::EnvSpec::horizon)
      .def_readwrite("h", &algd::EnvSpec::h)
      .def_readwrite("start_noise", &algd::EnvSpec::start_noise);
  py::class_<algd::EnvState>(m, "EnvState")
      .def_readonly("s", &algd::EnvState::s)
      .def_readonly("step_count", &algd::EnvState::step_count)
      .def_readonly("episode_cost", &algd::EnvState::episode_cost)
      .def_readonly("done", &algd::EnvState::done);
  py::class_<algd::StepResult>(m, "StepResult")
      .def_readonly("next", &algd::StepResult::next)
      .def_readonly("reward", &algd::StepResult::reward)
      .def_readonly("cost", &algd::StepResult::cost)
      .def_readonly("done", &algd::StepResult::done);
  m.def("make_env_spec", &algd::make_env_spec, py::arg("name"));
  m.def("reset_env", &algd::reset_env, py::arg("spec"), py::arg("rng"));
  m.def("step_env", &algd::step_env, py::arg("spec"), py::arg("state"), py::arg("action"));

  py::class_<algd::EnergyEval>(m, "EnergyEval")
      .def(py::init([](double q, double qc, algd::ActionVec grad_q, algd::ActionVec grad_qc) {
             return algd::EnergyEval{q, qc, std::move(grad_q), std::move(grad_qc)};
           }),
           py::arg("q"), py::arg("qc"), py::arg("grad_q"), py::arg("grad_qc"))
      .def_readwrite("q", &algd::EnergyEval::q)
      .def_readwrite("qc", &algd::EnergyEval::qc)
      .def_readwrite("grad_q", &algd::EnergyEval::grad_q)
      .def_readwrite("grad_qc", &algd::EnergyEval::grad_qc);
  py::class_<algd::DualState>(m, "DualState")
      .def(py::init([](double lambda, double rho, double h, double eta_lambda) {
             return algd::DualState{lambda, rho, h, eta_lambda};
           }),
           py::arg("lambda_") = 0.0, py::arg("rho") = 1.0, py::arg("h") = 25.0,
           py::arg("eta_lambda") = 0.01)
      .def_readwrite("lambda_", &algd::DualState::lambda)
      .def_readwrite("rho", &algd::DualState::rho)
      .def_readwrite("h", &algd::DualState::h)
      .def_readwrite("eta_lambda", &algd::DualState::eta_lambda);
  m.def("lagrangian", &algd::lagrangian, py::arg("e"), py::arg("d"));
  m.def("lagrangian_grad_a", &algd::lagrangian_grad_a, py::arg("e"), py::arg("d"));
  m.def("aug_lagrangian", &algd::aug_lagrangian, py::arg("e"), py::arg("d"));
  m.def("aug_lagrangian_grad_a", &algd::aug_lagrangian_grad_a, py::arg("e"), py::arg("d"));
  m.def("dual_update", &algd::dual_update, py::arg("d"), py::arg("mean_qc"));

  py::class_<algd::EnergyFn>(m, "EnergyFn")
      .def_readonly("descriptor", &algd::EnergyFn::descriptor);
  m.def("make_energy_fn", &algd::make_energy_fn, py::arg("value"), py::arg("grad"),
        py::arg("descriptor"), py::arg("d_a"));
  m.def("gaussian_mollified_score", &algd::gaussian_mollified_score, py::arg("mu"),
        py::arg("varsigma"), py::arg("sigma_tau"), py::arg("a"));
  m.def("quadrature_score", &algd::quadrature_score, py::arg("f"), py::arg("a_tau"),
        py::arg("sigma_tau"), py::arg("beta"), py::arg("nodes_per_axis") = 96);
  py::class_<algd::ScoreTarget>(m, "ScoreTarget")
      .def_readonly("value", &algd::ScoreTarget::value)
      .def_readonly("weights", &algd::ScoreTarget::weights)
      .def_readonly("ess", &algd::ScoreTarget::ess);
  m.def("mc_score_target", &algd::mc_score_target, py::arg("f"), py::arg("a_tau"),
        py::arg("sigma_tau"), py::arg("beta"), py::arg("N"), py::arg("rng"));
}
