#include "algd/env.hpp"

#include <cmath>
#include <stdexcept>

namespace algd {
namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double theta) {
  // Into (-pi, pi].
  theta = std::fmod(theta + kPi, 2.0 * kPi);
  if (theta <= 0.0) theta += 2.0 * kPi;
  return theta - kPi;
}

double clampa(double x) { return std::min(1.0, std::max(-1.0, x)); }

}  // namespace

EnvSpec make_env_spec(const std::string& name) {
  EnvSpec spec;
  spec.name = name;
  if (name == "point_hazard") {
    spec.d_s = 4;
    spec.d_a = 2;
  } else if (name == "diff_drive") {
    spec.d_s = 3;
    spec.d_a = 2;
  } else {
    throw std::invalid_argument("unknown environment: " + name);
  }
  return spec;
}

EnvState reset_env(const EnvSpec& spec, RngStream& rng) {
  EnvState st;
  st.s = StateVec::Zero(spec.d_s);
  st.s(0) = spec.start(0) + rng.uniform_in(-spec.start_noise, spec.start_noise);
  st.s(1) = spec.start(1) + rng.uniform_in(-spec.start_noise, spec.start_noise);
  if (spec.name == "diff_drive")
    st.s(2) = rng.uniform_in(-spec.start_noise, spec.start_noise);
  else if (spec.name != "point_hazard")
    throw std::invalid_argument("unknown environment: " + spec.name);
  return st;
}

Eigen::Vector2d env_position(const EnvSpec& spec, const StateVec& s) {
  (void)spec;
  return Eigen::Vector2d(s(0), s(1));
}

StepResult step_env(const EnvSpec& spec, const EnvState& st, const ActionVec& a) {
  if (st.done) throw std::logic_error("step_env: episode already finished");
  if (a.size() != spec.d_a) throw std::invalid_argument("step_env: action dimension mismatch");

  StepResult out;
  out.next = st;
  StateVec& s = out.next.s;

  const Eigen::Vector2d pos_prev = env_position(spec, st.s);
  if (spec.name == "point_hazard") {
    const double ax = clampa(a(0)), ay = clampa(a(1));
    s(2) = spec.damping * st.s(2) + spec.dt * spec.accel_scale * ax;
    s(3) = spec.damping * st.s(3) + spec.dt * spec.accel_scale * ay;
    s(0) = st.s(0) + spec.dt * s(2);
    s(1) = st.s(1) + spec.dt * s(3);
  } else if (spec.name == "diff_drive") {
    const double v = spec.v_scale * clampa(a(0));
    const double omega = spec.omega_scale * clampa(a(1));
    const double theta = st.s(2);
    s(0) = st.s(0) + spec.dt * v * std::cos(theta);
    s(1) = st.s(1) + spec.dt * v * std::sin(theta);
    s(2) = wrap_angle(theta + spec.dt * omega);
  } else {
    throw std::invalid_argument("unknown environment: " + spec.name);
  }

  const Eigen::Vector2d pos_next = env_position(spec, s);
  const double dist_prev = (pos_prev - spec.goal).norm();
  const double dist_next = (pos_next - spec.goal).norm();
  const bool at_goal = dist_next <= spec.goal_radius;

  out.reward = dist_prev - dist_next + (at_goal ? 10.0 : 0.0);
  out.cost = (pos_next - spec.hazard).norm() <= spec.hazard_radius ? 1.0 : 0.0;

  out.next.step_count = st.step_count + 1;
  out.next.episode_cost = st.episode_cost + out.cost;
  out.done = at_goal || out.next.step_count >= spec.horizon;
  out.next.done = out.done;
  return out;
}

}  // namespace algd
