#pragma once

#include "algd/types.hpp"

namespace algd {

/// Critic readouts at one (s, a): q is the min over the double-Q pair, qc
/// the arithmetic mean over the cost-critic ensemble, with their action
/// gradients.
struct EnergyEval {
  double q = 0.0;
  double qc = 0.0;
  ActionVec grad_q;
  ActionVec grad_qc;
};

struct DualState {
  double lambda = 0.0;  // >= 0 always
  double rho = 1.0;     // > 0, fixed during a run
  double h = 25.0;
  double eta_lambda = 0.01;
};

/// -q + lambda * (qc - h)
double lagrangian(const EnergyEval& e, const DualState& d);

/// -grad_q + lambda * grad_qc
ActionVec lagrangian_grad_a(const EnergyEval& e, const DualState& d);

/// -q + (max(0, lambda + rho*(qc - h))^2 - lambda^2) / (2 rho).
/// Throws if rho <= 0.
double aug_lagrangian(const EnergyEval& e, const DualState& d);

/// -grad_q + max(0, lambda + rho*(qc - h)) * grad_qc. At the exact hinge
/// boundary the multiplier is 0 (inactive branch).
ActionVec aug_lagrangian_grad_a(const EnergyEval& e, const DualState& d);

/// lambda <- max(0, lambda + eta_lambda * (mean_qc - h)); other fields kept.
DualState dual_update(const DualState& d, double mean_qc);

}  // namespace algd
