#pragma once

#include <vector>

#include "algd/rng.hpp"
#include "algd/types.hpp"

namespace algd {

/// Variance-exploding noise ladder. sigma[0] = 0 is the clean distribution;
/// sigma[1..K] are log-spaced from sigma_min to sigma_max (endpoints
/// inclusive). dsq[tau-1] = sigma[tau]^2 - sigma[tau-1]^2 is the discrete
/// squared increment used by both the reverse-sampler drift and its noise
/// term.
struct NoiseSchedule {
  int K = 0;
  std::vector<double> sigma;  // length K+1, sigma[0] == 0, strictly increasing
  std::vector<double> dsq;    // length K, all positive

  double sigma_at(int tau) const { return sigma[static_cast<std::size_t>(tau)]; }
  double dsq_at(int tau) const { return dsq[static_cast<std::size_t>(tau) - 1]; }
};

/// sigma[tau] = sigma_min * (sigma_max/sigma_min)^((tau-1)/(K-1)) for
/// tau = 1..K; K = 1 collapses to the single value sigma_max.
/// Requires K >= 1 and 0 < sigma_min < sigma_max.
NoiseSchedule build_schedule(int K, double sigma_min, double sigma_max);

/// a0 + sigma[tau] * eps with eps ~ N(0, I) per coordinate; 1 <= tau <= K.
ActionVec forward_perturb(const ActionVec& a0, int tau, const NoiseSchedule& sch, RngStream& rng);

}  // namespace algd
