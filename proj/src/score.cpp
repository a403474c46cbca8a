#include "algd/score.hpp"

#include <cmath>
#include <stdexcept>

namespace algd {
namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

}  // namespace

EnergyFn make_energy_fn(std::function<double(const ActionVec&)> value,
                        std::function<ActionVec(const ActionVec&)> grad,
                        const std::string& descriptor, int d_a) {
  if (d_a <= 0) throw std::invalid_argument("make_energy_fn: d_a must be positive");
  RngStream probe_rng(0x5C07EULL, 0);
  const double step = 1e-5;
  for (int probe = 0; probe < 5; ++probe) {
    ActionVec a(d_a);
    for (int k = 0; k < d_a; ++k) a(k) = probe_rng.uniform_in(-1.0, 1.0);
    const ActionVec g = grad(a);
    for (int k = 0; k < d_a; ++k) {
      ActionVec ap = a, am = a;
      ap(k) += step;
      am(k) -= step;
      const double fd = (value(ap) - value(am)) / (2.0 * step);
      const double denom = std::max({std::abs(fd), std::abs(g(k)), 1e-2});
      if (std::abs(fd - g(k)) / denom > 1e-4)
        throw std::invalid_argument("make_energy_fn: gradient fails finite-difference check (" +
                                    descriptor + ")");
    }
  }
  return EnergyFn{std::move(value), std::move(grad), descriptor};
}

ActionVec gaussian_mollified_score(const ActionVec& mu, double varsigma, double sigma_tau,
                                   const ActionVec& a) {
  if (varsigma <= 0.0) throw std::invalid_argument("gaussian_mollified_score: varsigma <= 0");
  if (sigma_tau < 0.0) throw std::invalid_argument("gaussian_mollified_score: sigma_tau < 0");
  if (mu.size() != a.size())
    throw std::invalid_argument("gaussian_mollified_score: dimension mismatch");
  return -(a - mu) / (varsigma * varsigma + sigma_tau * sigma_tau);
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double pim4 = 0.7511255444649424828587;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    // Initial guesses for roots in decreasing order, then Newton on the
    // orthonormal Hermite recurrence.
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * nodes[1];
    else
      z = 2.0 * z - nodes[i - 2];
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14) break;
    }
    nodes[i] = z;
    nodes[n - 1 - i] = -z;
    weights[i] = 2.0 / (pp * pp);
    weights[n - 1 - i] = weights[i];
  }
  // Moment identities of the exp(-x^2) weight: sum w = sqrt(pi),
  // sum w x^2 = sqrt(pi)/2.
  double w_sum = 0.0, wx2_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    w_sum += weights[i];
    wx2_sum += weights[i] * nodes[i] * nodes[i];
  }
  if (std::abs(w_sum - kSqrtPi) > 1e-10 || std::abs(wx2_sum - kSqrtPi / 2.0) > 1e-10)
    throw std::logic_error("gauss_hermite: node/weight moments failed validation");
}

ActionVec quadrature_score(const EnergyFn& f, const ActionVec& a_tau, double sigma_tau,
                           double beta, int nodes_per_axis) {
  if (beta <= 0.0) throw std::invalid_argument("quadrature_score: beta must be positive");
  if (sigma_tau < 0.0) throw std::invalid_argument("quadrature_score: sigma_tau < 0");
  const int d = static_cast<int>(a_tau.size());
  if (d != 1 && d != 2) throw std::invalid_argument("quadrature_score: d_a must be 1 or 2");
  if (sigma_tau == 0.0) return -f.grad(a_tau) / beta;
  if (nodes_per_axis < 64)
    throw std::invalid_argument("quadrature_score: need at least 64 nodes per axis");

  std::vector<double> x, w;
  gauss_hermite(nodes_per_axis, x, w);
  const double scale = std::sqrt(2.0) * sigma_tau;  // a0 = a_tau + scale * x

  // Gather node energies first for the max shift; normalization constants
  // cancel in the ratio.
  const std::size_t total = (d == 1) ? x.size() : x.size() * x.size();
  std::vector<ActionVec> points(total);
  std::vector<double> energies(total), node_w(total);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d == 1) {
      ActionVec a0(1);
      a0(0) = a_tau(0) + scale * x[i];
      points[idx] = a0;
      node_w[idx] = w[i];
      energies[idx] = -f.value(a0) / beta;
      ++idx;
    } else {
      for (std::size_t j = 0; j < x.size(); ++j) {
        ActionVec a0(2);
        a0(0) = a_tau(0) + scale * x[i];
        a0(1) = a_tau(1) + scale * x[j];
        points[idx] = a0;
        node_w[idx] = w[i] * w[j];
        energies[idx] = -f.value(a0) / beta;
        ++idx;
      }
    }
  }
  double e_max = energies[0];
  for (double e : energies) e_max = std::max(e_max, e);

  double denom = 0.0;
  ActionVec numer = ActionVec::Zero(d);
  for (std::size_t k = 0; k < total; ++k) {
    const double c = node_w[k] * std::exp(energies[k] - e_max);
    denom += c;
    numer += c * (-f.grad(points[k]) / beta);
  }
  return numer / denom;
}

ScoreTarget mc_score_target(const EnergyFn& f, const ActionVec& a_tau, double sigma_tau,
                            double beta, int N, RngStream& rng) {
  if (N < 1) throw std::invalid_argument("mc_score_target: N must be >= 1");
  if (sigma_tau <= 0.0) throw std::invalid_argument("mc_score_target: sigma_tau must be positive");
  if (beta <= 0.0) throw std::invalid_argument("mc_score_target: beta must be positive");
  const int d = static_cast<int>(a_tau.size());

  std::vector<ActionVec> samples(static_cast<std::size_t>(N));
  std::vector<double> energy(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    ActionVec a = a_tau;
    for (int k = 0; k < d; ++k) a(k) += sigma_tau * rng.normal();
    const double e = -f.value(a) / beta;
    if (!std::isfinite(e))
      throw std::runtime_error("mc_score_target: non-finite energy at sample " +
                               std::to_string(i));
    samples[static_cast<std::size_t>(i)] = std::move(a);
    energy[static_cast<std::size_t>(i)] = e;
  }

  double e_max = energy[0];
  for (double e : energy) e_max = std::max(e_max, e);

  ScoreTarget out;
  out.weights.resize(static_cast<std::size_t>(N));
  double z = 0.0;
  for (int i = 0; i < N; ++i) {
    out.weights[static_cast<std::size_t>(i)] = std::exp(energy[static_cast<std::size_t>(i)] - e_max);
    z += out.weights[static_cast<std::size_t>(i)];
  }
  out.value = ActionVec::Zero(d);
  double w_sq = 0.0;
  for (int i = 0; i < N; ++i) {
    double& wi = out.weights[static_cast<std::size_t>(i)];
    wi /= z;
    w_sq += wi * wi;
    const ActionVec g = f.grad(samples[static_cast<std::size_t>(i)]);
    if (!g.allFinite())
      throw std::runtime_error("mc_score_target: non-finite gradient at sample " +
                               std::to_string(i));
    out.value += wi * (-g / beta);
  }
  out.ess = 1.0 / w_sq;
  return out;
}

}  // namespace algd
