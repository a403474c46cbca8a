#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "algd/config.hpp"
#include "algd/energy.hpp"
#include "algd/score.hpp"
#include "algd/train.hpp"
#include "algd/types.hpp"

namespace algd {

/// 2-D action slice for grid evaluations; ranges must lie within [-1,1].
struct GridSpec {
  double a1_min = -1.0, a1_max = 1.0;
  double a2_min = -1.0, a2_max = 1.0;
  int resolution = 101;
  StateVec state;  // fixed state for critic-backed grids
};

void validate(const GridSpec& grid);

/// Outcome of one verification check. pass is decided only by the
/// documented thresholds; metrics carry the measured numbers.
struct CheckReport {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::string artifact_path;

  void add(const std::string& label, double value) { metrics.emplace_back(label, value); }
  double metric(const std::string& label) const;
};

nlohmann::json report_to_json(const CheckReport& report);

/// Scalar test function over 2-D actions with analytic gradient.
struct TestFn {
  std::function<double(const ActionVec&)> value;
  std::function<ActionVec(const ActionVec&)> grad;
  std::string descriptor;
};

/// One curvature trial: reward stand-in q, cost stand-in qc.
struct HessianTrial {
  TestFn q;
  TestFn qc;
  bool qc_affine = false;
  ActionVec qc_grad_const;  // the constant gradient g when qc_affine
};

/// Randomized analytic family with fixed seeds: q = -||a - mu_r||^2,
/// affine qc = g . a + b, smooth qc = ||a - mu_c||^2.
std::vector<HessianTrial> default_hessian_trials(std::uint64_t seed, int n_affine, int n_smooth);

/// Finite-difference Hessians (central, step 1e-4) of the augmented and
/// standard Lagrangians over the grid. Checks: at active-hinge points with
/// affine qc, H_aug - H_std = rho * g g^T within 1e-6; at inactive points
/// the hinge term is constant, so the augmentation adds no curvature over
/// the plain -q surface (gap 0 within 1e-6); for smooth qc, the most
/// negative eigenvalue of the active-point gap stays above -C * |qc - h|
/// with C fitted on half the points and validated on the other half.
CheckReport check_hessian_gap(const std::vector<HessianTrial>& trials, const DualState& d,
                              const GridSpec& grid, const std::string& out_dir);

/// Grid-normalizes exp(-L/beta) for both Lagrangians in three scenarios:
/// (a) lambda = 0 with qc <= h everywhere, (b) lambda > 0 with qc == h,
/// (c) negative control violating complementary slackness. Passes iff the
/// max pointwise density gap is < 1e-9 for (a) and (b) and > 1e-6 for (c).
CheckReport check_boltzmann_invariance(const GridSpec& grid, double beta,
                                       const std::string& out_dir);

/// RMSE of mc_score_target against the Gaussian closed form over `repeats`
/// repeats per N; fits log RMSE on log N and passes iff the slope lies in
/// [-0.65, -0.35].
CheckReport check_mc_convergence(double beta, double varsigma, double sigma_tau,
                                 const std::vector<int>& N_list, int repeats, RngStream& rng,
                                 const std::string& out_dir);

/// Evaluates both Lagrangians over the action grid at grid.state and writes
/// one CSV per energy (columns a1,a2,energy,qc,feasible where feasible is
/// the indicator qc <= h). Passes iff every value is finite.
CheckReport export_landscape(const EnergyBatchFn& energies, const DualState& d_std,
                             const DualState& d_aug, const GridSpec& grid,
                             const std::string& out_dir);

/// Critic-backed wrapper over the agent's value networks.
CheckReport export_landscape(const AgentState& agent, const DualState& d_std,
                             const DualState& d_aug, const GridSpec& grid,
                             const std::string& out_dir);

/// Trains until `episodes` episodes finish (bounded by max_env_steps) and
/// returns the trainer; used by the landscape reproduction run.
struct SmallRunResult {
  AgentState agent;
  std::uint64_t env_steps = 0;
  int episodes = 0;
};
SmallRunResult train_for_episodes(const EnvSpec& spec, const TrainConfig& cfg, Variant variant,
                                  int episodes, std::uint64_t max_env_steps);

/// Per-seed comparison of the two guidance variants at identical configs.
struct SeedOutcome {
  std::uint64_t seed = 0;
  // env_steps at the first of 5 consecutive evaluations with episode cost
  // <= h; total_env_steps + 1 when never reached.
  std::uint64_t steps_to_feasible_std = 0, steps_to_feasible_aug = 0;
  double lambda_var_std = 0.0, lambda_var_aug = 0.0;  // trailing 25% of epochs
  double overshoot_std = 0.0, overshoot_aug = 0.0;    // trailing mean max(0, cost - h)
};

/// Runs both variants for every seed with the shared config, logging each
/// run under out_dir. Passes iff the augmented variant reaches sustained
/// feasibility no later than standard in >= 4 of 5 seeds AND has strictly
/// lower trailing lambda variance in >= 4 of 5 seeds.
CheckReport ab_stability_experiment(const RunConfig& base, const std::vector<std::uint64_t>& seeds,
                                    const std::string& out_dir,
                                    std::vector<SeedOutcome>* outcomes = nullptr);

/// Shared by ab_stability_experiment and the train subcommand: one full
/// training run with epoch logging, periodic evaluation, and checkpoints.
/// Returns the final agent. eval cadence and output paths come from cfg.
AgentState run_training(const RunConfig& cfg, const std::string& run_dir);

}  // namespace algd
