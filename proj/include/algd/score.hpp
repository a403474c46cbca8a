#pragma once

#include <functional>
#include <string>
#include <vector>

#include "algd/rng.hpp"
#include "algd/types.hpp"

namespace algd {

/// An energy over actions together with its exact gradient. Use
/// make_energy_fn for oracle instances; it spot-checks grad against finite
/// differences at construction.
struct EnergyFn {
  std::function<double(const ActionVec&)> value;
  std::function<ActionVec(const ActionVec&)> grad;
  std::string descriptor;
};

/// Wraps (value, grad) after verifying grad by central differences at a few
/// fixed pseudo-random probe points in [-1,1]^d_a. Throws on mismatch.
EnergyFn make_energy_fn(std::function<double(const ActionVec&)> value,
                        std::function<ActionVec(const ActionVec&)> grad,
                        const std::string& descriptor, int d_a);

/// Score of N(mu, (varsigma^2 + sigma_tau^2) I) at a:
/// -(a - mu) / (varsigma^2 + sigma_tau^2). Requires varsigma > 0,
/// sigma_tau >= 0.
ActionVec gaussian_mollified_score(const ActionVec& mu, double varsigma, double sigma_tau,
                                   const ActionVec& a);

/// Gauss-Hermite nodes/weights for integral of exp(-x^2) f(x) dx with
/// n-point accuracy; node moments are validated internally.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Posterior-weighted score at a_tau under posterior N(a_tau, sigma_tau^2 I):
/// ratio of Gaussian-weighted integrals of exp(-L/beta) * (-grad L / beta)
/// and exp(-L/beta), tensor-product Gauss-Hermite with nodes_per_axis
/// points per axis and max-energy shift. d_a must be 1 or 2; sigma_tau = 0
/// returns -grad(a_tau)/beta directly.
ActionVec quadrature_score(const EnergyFn& f, const ActionVec& a_tau, double sigma_tau,
                           double beta, int nodes_per_axis = 96);

/// Weighted Monte-Carlo estimate of the guided score.
struct ScoreTarget {
  ActionVec value;
  std::vector<double> weights;  // nonnegative, sum to 1
  double ess = 0.0;             // 1 / sum w_i^2
};

/// Draws a_i = a_tau + sigma_tau * eps_i (sample i fully drawn, coordinate
/// order, before sample i+1), sets E_i = -value(a_i)/beta, weights by
/// softmax over E with a max shift, and returns sum_i w_i * (-grad(a_i)/beta).
/// Requires N >= 1, sigma_tau > 0, beta > 0; non-finite energies or
/// gradients raise an error naming the sample index.
ScoreTarget mc_score_target(const EnergyFn& f, const ActionVec& a_tau, double sigma_tau,
                            double beta, int N, RngStream& rng);

}  // namespace algd
