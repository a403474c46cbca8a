#pragma once

#include <Eigen/Core>

namespace algd {

// Environment state and action vectors. Actions live in [-1, 1]^d_a after
// final clipping; states are environment coordinates/velocities.
using StateVec = Eigen::VectorXd;
using ActionVec = Eigen::VectorXd;

/// One environment interaction record.
struct Transition {
  StateVec state;
  ActionVec action;
  double reward = 0.0;
  double cost = 0.0;  // per-step safety cost, >= 0
  StateVec next_state;
  bool done = false;
};

}  // namespace algd
