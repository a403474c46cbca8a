#include "algd/energy.hpp"

#include <algorithm>
#include <stdexcept>

namespace algd {

double lagrangian(const EnergyEval& e, const DualState& d) {
  return -e.q + d.lambda * (e.qc - d.h);
}

ActionVec lagrangian_grad_a(const EnergyEval& e, const DualState& d) {
  return -e.grad_q + d.lambda * e.grad_qc;
}

double aug_lagrangian(const EnergyEval& e, const DualState& d) {
  if (d.rho <= 0.0) throw std::invalid_argument("aug_lagrangian: rho must be positive");
  const double hinge = std::max(0.0, d.lambda + d.rho * (e.qc - d.h));
  return -e.q + (hinge * hinge - d.lambda * d.lambda) / (2.0 * d.rho);
}

ActionVec aug_lagrangian_grad_a(const EnergyEval& e, const DualState& d) {
  if (d.rho <= 0.0) throw std::invalid_argument("aug_lagrangian_grad_a: rho must be positive");
  const double mult = std::max(0.0, d.lambda + d.rho * (e.qc - d.h));
  return -e.grad_q + mult * e.grad_qc;
}

DualState dual_update(const DualState& d, double mean_qc) {
  DualState out = d;
  out.lambda = std::max(0.0, d.lambda + d.eta_lambda * (mean_qc - d.h));
  return out;
}

}  // namespace algd
