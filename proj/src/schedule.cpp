#include "algd/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace algd {

NoiseSchedule build_schedule(int K, double sigma_min, double sigma_max) {
  if (K < 1) throw std::invalid_argument("build_schedule: K must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_min < sigma_max)) {
    throw std::invalid_argument("build_schedule: need 0 < sigma_min < sigma_max");
  }

  NoiseSchedule sch;
  sch.K = K;
  sch.sigma.resize(static_cast<std::size_t>(K) + 1);
  sch.sigma[0] = 0.0;
  if (K == 1) {
    sch.sigma[1] = sigma_max;
  } else {
    const double ratio = sigma_max / sigma_min;
    for (int tau = 1; tau <= K; ++tau) {
      sch.sigma[static_cast<std::size_t>(tau)] =
          sigma_min * std::pow(ratio, static_cast<double>(tau - 1) / static_cast<double>(K - 1));
    }
    sch.sigma[static_cast<std::size_t>(K)] = sigma_max;  // endpoint exact
  }

  sch.dsq.resize(static_cast<std::size_t>(K));
  for (int tau = 1; tau <= K; ++tau) {
    const double hi = sch.sigma[static_cast<std::size_t>(tau)];
    const double lo = sch.sigma[static_cast<std::size_t>(tau) - 1];
    const double d = hi * hi - lo * lo;
    if (!(d > 0.0)) throw std::logic_error("build_schedule: non-increasing sigma ladder");
    sch.dsq[static_cast<std::size_t>(tau) - 1] = d;
  }
  return sch;
}

ActionVec forward_perturb(const ActionVec& a0, int tau, const NoiseSchedule& sch, RngStream& rng) {
  if (tau < 1 || tau > sch.K) throw std::invalid_argument("forward_perturb: tau out of range");
  const double s = sch.sigma_at(tau);
  ActionVec out = a0;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += s * rng.normal();
  return out;
}

}  // namespace algd
