#pragma once

#include <string>

#include <Eigen/Core>

#include "algd/rng.hpp"
#include "algd/types.hpp"

namespace algd {

/// Parameters of the built-in 2-D navigation tasks. Both share one layout:
/// start near (-1.2, 0), goal disc at (1.2, 0), one hazard disc at the
/// origin directly on the straight-line path.
struct EnvSpec {
  std::string name;  // "point_hazard" | "diff_drive"
  int d_s = 0;
  int d_a = 0;
  double dt = 0.1;
  int horizon = 400;
  double h = 25.0;  // episode cost budget

  double damping = 0.95;      // point_hazard velocity damping
  double accel_scale = 1.0;   // point_hazard acceleration per unit action
  double v_scale = 1.0;       // diff_drive linear speed per unit action
  double omega_scale = 2.0;   // diff_drive turn rate per unit action
  double start_noise = 0.1;   // uniform box perturbation of the start pose
  Eigen::Vector2d start{-1.2, 0.0};
  Eigen::Vector2d goal{1.2, 0.0};
  double goal_radius = 0.3;
  Eigen::Vector2d hazard{0.0, 0.0};
  double hazard_radius = 0.4;
};

/// Built-in specs by name:
///  - point_hazard: state (x, y, vx, vy), double integrator
///      v <- damping * v + dt * accel_scale * a,  p <- p + dt * v
///  - diff_drive: state (x, y, theta), unicycle
///      x <- x + dt * v_scale * a1 * cos(theta)
///      y <- y + dt * v_scale * a1 * sin(theta)
///      theta <- wrap(theta + dt * omega_scale * a2) into (-pi, pi]
/// Unknown name throws.
EnvSpec make_env_spec(const std::string& name);

struct EnvState {
  StateVec s;
  int step_count = 0;
  double episode_cost = 0.0;
  bool done = false;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  double cost = 0.0;
  bool done = false;
};

/// Start pose plus an independent uniform(-start_noise, start_noise) draw
/// per pose coordinate, in state order: x, y for point_hazard; x, y, theta
/// for diff_drive. Velocities start at zero.
EnvState reset_env(const EnvSpec& spec, RngStream& rng);

/// Deterministic transition. Actions are clamped to [-1, 1] per coordinate.
/// reward = (goal distance before - after) + 10 when the goal disc is
/// reached; cost = 1 iff the next position lies in the hazard disc (a pure
/// function of the next state); done iff goal reached or step_count hits
/// horizon. Stepping a finished episode throws.
StepResult step_env(const EnvSpec& spec, const EnvState& st, const ActionVec& a);

/// Position (x, y) slice of a state.
Eigen::Vector2d env_position(const EnvSpec& spec, const StateVec& s);

}  // namespace algd
