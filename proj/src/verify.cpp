#include "algd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "algd/csv_log.hpp"

namespace algd {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::ofstream open_artifact(const std::string& out_dir, const std::string& file) {
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / file).string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("verify: cannot write " + path);
  out << std::setprecision(17);  // doubles round-trip losslessly
  return out;
}

std::string artifact_path(const std::string& out_dir, const std::string& file) {
  return (std::filesystem::path(out_dir) / file).string();
}

/// Central-difference Hessian with step 1e-4 per axis.
Eigen::Matrix2d fd_hessian(const std::function<double(const ActionVec&)>& f, const ActionVec& a) {
  const double s = 1e-4;
  Eigen::Matrix2d H;
  const double f0 = f(a);
  for (int i = 0; i < 2; ++i) {
    ActionVec ap = a, am = a;
    ap(i) += s;
    am(i) -= s;
    H(i, i) = (f(ap) - 2.0 * f0 + f(am)) / (s * s);
  }
  ActionVec pp = a, pm = a, mp = a, mm = a;
  pp(0) += s; pp(1) += s;
  pm(0) += s; pm(1) -= s;
  mp(0) -= s; mp(1) += s;
  mm(0) -= s; mm(1) -= s;
  H(0, 1) = H(1, 0) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * s * s);
  return H;
}

double min_eig_2x2(const Eigen::Matrix2d& H) {
  const double t = 0.5 * (H(0, 0) + H(1, 1));
  const double d = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
  return t - std::sqrt(std::max(0.0, t * t - d));
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

void validate(const GridSpec& grid) {
  require(grid.resolution >= 3, "GridSpec: resolution must be >= 3");
  require(grid.a1_min < grid.a1_max && grid.a2_min < grid.a2_max,
          "GridSpec: ranges must be nonempty");
  require(grid.a1_min >= -1.0 && grid.a1_max <= 1.0 && grid.a2_min >= -1.0 && grid.a2_max <= 1.0,
          "GridSpec: ranges must lie within [-1,1]");
}

double CheckReport::metric(const std::string& label) const {
  for (const auto& [key, value] : metrics)
    if (key == label) return value;
  throw std::out_of_range("CheckReport: no metric named " + label);
}

nlohmann::json report_to_json(const CheckReport& report) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [key, value] : report.metrics) metrics[key] = value;
  return nlohmann::json{{"name", report.name},
                        {"pass", report.pass},
                        {"metrics", metrics},
                        {"artifact_path", report.artifact_path}};
}

std::vector<HessianTrial> default_hessian_trials(std::uint64_t seed, int n_affine, int n_smooth) {
  RngStream rng(seed, 40);
  std::vector<HessianTrial> trials;
  for (int t = 0; t < n_affine; ++t) {
    ActionVec mu_r(2), g(2);
    mu_r << rng.uniform_in(-0.5, 0.5), rng.uniform_in(-0.5, 0.5);
    do {
      g << rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0);
    } while (g.norm() < 0.3);
    const double b = rng.uniform_in(0.75, 1.25);
    HessianTrial trial;
    trial.q = TestFn{[mu_r](const ActionVec& a) { return -(a - mu_r).squaredNorm(); },
                     [mu_r](const ActionVec& a) { return ActionVec(-2.0 * (a - mu_r)); },
                     "q_quadratic"};
    trial.qc = TestFn{[g, b](const ActionVec& a) { return g.dot(a) + b; },
                      [g](const ActionVec& a) {
                        (void)a;
                        return g;
                      },
                      "qc_affine"};
    trial.qc_affine = true;
    trial.qc_grad_const = g;
    trials.push_back(std::move(trial));
  }
  for (int t = 0; t < n_smooth; ++t) {
    ActionVec mu_r(2), mu_c(2);
    mu_r << rng.uniform_in(-0.5, 0.5), rng.uniform_in(-0.5, 0.5);
    mu_c << rng.uniform_in(-0.5, 0.5), rng.uniform_in(-0.5, 0.5);
    HessianTrial trial;
    trial.q = TestFn{[mu_r](const ActionVec& a) { return -(a - mu_r).squaredNorm(); },
                     [mu_r](const ActionVec& a) { return ActionVec(-2.0 * (a - mu_r)); },
                     "q_quadratic"};
    trial.qc = TestFn{[mu_c](const ActionVec& a) { return (a - mu_c).squaredNorm(); },
                      [mu_c](const ActionVec& a) { return ActionVec(2.0 * (a - mu_c)); },
                      "qc_smooth"};
    trial.qc_affine = false;
    trials.push_back(std::move(trial));
  }
  return trials;
}

CheckReport check_hessian_gap(const std::vector<HessianTrial>& trials, const DualState& d,
                              const GridSpec& grid, const std::string& out_dir) {
  validate(grid);
  require(!trials.empty(), "check_hessian_gap: need at least one trial");
  require(d.rho > 0.0, "check_hessian_gap: rho must be positive");

  std::ofstream art = open_artifact(out_dir, "hessian_gap.csv");
  art << "trial,kind,a1,a2,slack,qc_minus_h,gap00,gap01,gap11,min_eig,deficit,affine_err\n";

  // Points whose hinge state could flip inside the difference stencil are
  // excluded from the branch-specific checks.
  const double margin = 0.05;
  double max_affine_err = 0.0, max_inactive_err = 0.0;
  std::vector<std::pair<double, double>> smooth_pts;  // (|qc - h|, deficit)
  int n_active = 0, n_inactive = 0, n_deficit_pos = 0;

  for (std::size_t t = 0; t < trials.size(); ++t) {
    const HessianTrial& trial = trials[t];
    auto L_std = [&](const ActionVec& a) {
      return -trial.q.value(a) + d.lambda * (trial.qc.value(a) - d.h);
    };
    auto L_aug = [&](const ActionVec& a) {
      const double hinge = std::max(0.0, d.lambda + d.rho * (trial.qc.value(a) - d.h));
      return -trial.q.value(a) + (hinge * hinge - d.lambda * d.lambda) / (2.0 * d.rho);
    };
    auto base = [&](const ActionVec& a) { return -trial.q.value(a); };
    for (int i = 0; i < grid.resolution; ++i) {
      for (int j = 0; j < grid.resolution; ++j) {
        ActionVec a(2);
        a << grid.a1_min + (grid.a1_max - grid.a1_min) * i / (grid.resolution - 1),
            grid.a2_min + (grid.a2_max - grid.a2_min) * j / (grid.resolution - 1);
        const double qc = trial.qc.value(a);
        const double slack = d.lambda + d.rho * (qc - d.h);
        if (std::abs(slack) < margin) continue;

        // Active points measure the curvature the penalty adds beyond the
        // standard Lagrangian; inactive points measure it against the plain
        // -q surface, where the hinge term is the constant -lambda^2/(2 rho).
        const Eigen::Matrix2d gap = slack < 0.0
                                        ? (fd_hessian(L_aug, a) - fd_hessian(base, a)).eval()
                                        : (fd_hessian(L_aug, a) - fd_hessian(L_std, a)).eval();
        const double eig = min_eig_2x2(gap);
        double affine_err = std::numeric_limits<double>::quiet_NaN();
        double deficit = std::numeric_limits<double>::quiet_NaN();
        const char* kind = trial.qc_affine ? "affine" : "smooth";

        if (slack < 0.0) {
          ++n_inactive;
          max_inactive_err = std::max(max_inactive_err, gap.cwiseAbs().maxCoeff());
        } else {
          ++n_active;
          if (trial.qc_affine) {
            const Eigen::Matrix2d expect =
                d.rho * trial.qc_grad_const * trial.qc_grad_const.transpose();
            affine_err = (gap - expect).cwiseAbs().maxCoeff();
            max_affine_err = std::max(max_affine_err, affine_err);
          } else {
            deficit = std::max(0.0, -eig);
            if (deficit > 0.0) ++n_deficit_pos;
            smooth_pts.emplace_back(std::abs(qc - d.h), deficit);
          }
        }
        art << t << ',' << kind << ',' << a(0) << ',' << a(1) << ',' << slack << ','
            << qc - d.h << ',' << gap(0, 0) << ',' << gap(0, 1) << ',' << gap(1, 1) << ',' << eig
            << ',' << deficit << ',' << affine_err << '\n';
      }
    }
  }

  // Fit the residual-term constant on even-index points, validate the bound
  // deficit <= C * |qc - h| on the held-out odd-index points.
  double c_fit = 0.0;
  bool holdout_ok = true;
  for (std::size_t i = 0; i < smooth_pts.size(); i += 2)
    if (smooth_pts[i].first > 1e-9)
      c_fit = std::max(c_fit, smooth_pts[i].second / smooth_pts[i].first);
  for (std::size_t i = 1; i < smooth_pts.size(); i += 2)
    if (smooth_pts[i].second > c_fit * smooth_pts[i].first * (1.0 + 1e-6) + 1e-7)
      holdout_ok = false;
  // The analytic family has ||hess qc|| = 2, so C may not exceed 2 rho by
  // much; 10x headroom guards the fit against degenerate point sets.
  const bool c_bounded = c_fit <= 20.0 * d.rho;

  CheckReport report;
  report.name = "hessian_gap";
  report.artifact_path = artifact_path(out_dir, "hessian_gap.csv");
  report.add("max_affine_err", max_affine_err);
  report.add("max_inactive_err", max_inactive_err);
  report.add("c_fit", c_fit);
  report.add("n_active", n_active);
  report.add("n_inactive", n_inactive);
  report.add("n_deficit_pos", n_deficit_pos);
  report.pass = max_affine_err <= 1e-6 && max_inactive_err <= 1e-6 && holdout_ok && c_bounded &&
                n_deficit_pos > 0 && n_active > 0 && n_inactive > 0;
  return report;
}

namespace {

/// Max pointwise gap between the grid-normalized Boltzmann densities of the
/// two Lagrangians.
double density_gap(const std::function<double(const ActionVec&)>& q,
                   const std::function<double(const ActionVec&)>& qc, const DualState& d,
                   double beta, const GridSpec& grid, std::ofstream& art,
                   const std::string& scenario) {
  const int R = grid.resolution;
  std::vector<double> L_std(static_cast<std::size_t>(R) * R), L_aug(L_std.size());
  std::vector<double> a1s(L_std.size()), a2s(L_std.size());
  std::size_t idx = 0;
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j, ++idx) {
      ActionVec a(2);
      a << grid.a1_min + (grid.a1_max - grid.a1_min) * i / (R - 1),
          grid.a2_min + (grid.a2_max - grid.a2_min) * j / (R - 1);
      const double qv = q(a), qcv = qc(a);
      const double hinge = std::max(0.0, d.lambda + d.rho * (qcv - d.h));
      L_std[idx] = -qv + d.lambda * (qcv - d.h);
      L_aug[idx] = -qv + (hinge * hinge - d.lambda * d.lambda) / (2.0 * d.rho);
      a1s[idx] = a(0);
      a2s[idx] = a(1);
    }
  }
  auto normalize = [beta](const std::vector<double>& L) {
    std::vector<double> p(L.size());
    double e_max = -std::numeric_limits<double>::infinity();
    for (double v : L) e_max = std::max(e_max, -v / beta);
    double z = 0.0;
    for (std::size_t k = 0; k < L.size(); ++k) {
      p[k] = std::exp(-L[k] / beta - e_max);
      z += p[k];
    }
    for (double& v : p) v /= z;
    return p;
  };
  const std::vector<double> p_std = normalize(L_std), p_aug = normalize(L_aug);
  double gap = 0.0;
  for (std::size_t k = 0; k < p_std.size(); ++k) {
    gap = std::max(gap, std::abs(p_std[k] - p_aug[k]));
    art << scenario << ',' << a1s[k] << ',' << a2s[k] << ',' << L_std[k] << ',' << L_aug[k] << ','
        << p_std[k] << ',' << p_aug[k] << '\n';
  }
  return gap;
}

}  // namespace

CheckReport check_boltzmann_invariance(const GridSpec& grid, double beta,
                                       const std::string& out_dir) {
  validate(grid);
  require(beta > 0.0, "check_boltzmann_invariance: beta must be positive");
  std::ofstream art = open_artifact(out_dir, "boltzmann_invariance.csv");
  art << "scenario,a1,a2,L_std,L_aug,p_std,p_aug\n";

  ActionVec mu_r(2);
  mu_r << 0.3, -0.2;
  auto q = [mu_r](const ActionVec& a) { return -(a - mu_r).squaredNorm(); };

  // (a) lambda = 0 and qc <= h on the whole grid (slack satisfied).
  const double gap_feasible =
      density_gap(q, [](const ActionVec& a) { return a.squaredNorm(); },
                  DualState{0.0, 1.0, 10.0, 0.01}, beta, grid, art, "feasible_lambda0");
  // (b) lambda > 0 on the qc == h slice (boundary-active slackness).
  const double gap_boundary =
      density_gap(q, [](const ActionVec&) { return 1.0; }, DualState{0.7, 1.0, 1.0, 0.01}, beta,
                  grid, art, "boundary_lambda_pos");
  // (c) control violating complementary slackness: lambda > 0 while qc
  // crosses h, so the densities must differ.
  const double gap_control =
      density_gap(q, [](const ActionVec& a) { return 1.0 + a(0); },
                  DualState{0.5, 1.0, 1.0, 0.01}, beta, grid, art, "control_violated");

  CheckReport report;
  report.name = "boltzmann_invariance";
  report.artifact_path = artifact_path(out_dir, "boltzmann_invariance.csv");
  report.add("gap_feasible_lambda0", gap_feasible);
  report.add("gap_boundary_lambda_pos", gap_boundary);
  report.add("gap_control", gap_control);
  report.pass = gap_feasible < 1e-9 && gap_boundary < 1e-9 && gap_control > 1e-6;
  return report;
}

CheckReport check_mc_convergence(double beta, double varsigma, double sigma_tau,
                                 const std::vector<int>& N_list, int repeats, RngStream& rng,
                                 const std::string& out_dir) {
  require(beta > 0.0 && varsigma > 0.0, "check_mc_convergence: beta and varsigma must be positive");
  require(sigma_tau > 0.0, "check_mc_convergence: sigma_tau = 0 is the degenerate row, excluded");
  require(N_list.size() >= 2, "check_mc_convergence: need at least two N values");
  require(repeats >= 2, "check_mc_convergence: need at least two repeats");

  const double scale = beta / (varsigma * varsigma);
  const EnergyFn f = make_energy_fn(
      [scale](const ActionVec& a) { return 0.5 * scale * a.squaredNorm(); },
      [scale](const ActionVec& a) { return ActionVec(scale * a); }, "gaussian_energy", 1);
  const ActionVec mu = ActionVec::Zero(1);

  std::ofstream art = open_artifact(out_dir, "mc_convergence.csv");
  art << "N,rmse\n";

  std::vector<double> ns, rmses;
  for (int N : N_list) {
    require(N >= 1, "check_mc_convergence: N entries must be >= 1");
    double sq_sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      ActionVec a_tau(1);
      a_tau(0) = rng.uniform_in(-1.0, 1.0);
      const ScoreTarget t = mc_score_target(f, a_tau, sigma_tau, beta, N, rng);
      const ActionVec oracle = gaussian_mollified_score(mu, varsigma, sigma_tau, a_tau);
      sq_sum += (t.value - oracle).squaredNorm();
    }
    const double rmse = std::sqrt(sq_sum / repeats);
    ns.push_back(N);
    rmses.push_back(rmse);
    art << N << ',' << rmse << '\n';
  }

  const double slope = slope_loglog(ns, rmses);
  CheckReport report;
  report.name = "mc_convergence";
  report.artifact_path = artifact_path(out_dir, "mc_convergence.csv");
  report.add("slope", slope);
  for (std::size_t i = 0; i < ns.size(); ++i)
    report.add("rmse_N" + std::to_string(static_cast<int>(ns[i])), rmses[i]);
  report.pass = slope >= -0.65 && slope <= -0.35;
  return report;
}

CheckReport export_landscape(const EnergyBatchFn& energies, const DualState& d_std,
                             const DualState& d_aug, const GridSpec& grid,
                             const std::string& out_dir) {
  validate(grid);
  require(d_aug.rho > 0.0, "export_landscape: rho must be positive");
  const int R = grid.resolution;
  const Eigen::Index n = static_cast<Eigen::Index>(R) * R;
  Eigen::MatrixXd A(n, 2);
  Eigen::MatrixXd S(n, grid.state.size());
  Eigen::Index idx = 0;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j, ++idx) {
      A(idx, 0) = grid.a1_min + (grid.a1_max - grid.a1_min) * i / (R - 1);
      A(idx, 1) = grid.a2_min + (grid.a2_max - grid.a2_min) * j / (R - 1);
      if (grid.state.size() > 0) S.row(idx) = grid.state.transpose();
    }
  const BatchEnergies e = energies(S, A);

  std::ofstream f_std = open_artifact(out_dir, "landscape_standard.csv");
  std::ofstream f_aug = open_artifact(out_dir, "landscape_augmented.csv");
  f_std << "a1,a2,energy,qc,feasible\n";
  f_aug << "a1,a2,energy,qc,feasible\n";
  bool finite = true;
  double feasible_count = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double L_std = -e.q(k) + d_std.lambda * (e.qc(k) - d_std.h);
    const double hinge = std::max(0.0, d_aug.lambda + d_aug.rho * (e.qc(k) - d_aug.h));
    const double L_aug =
        -e.q(k) + (hinge * hinge - d_aug.lambda * d_aug.lambda) / (2.0 * d_aug.rho);
    const int feasible = e.qc(k) <= d_aug.h ? 1 : 0;
    feasible_count += feasible;
    finite = finite && std::isfinite(L_std) && std::isfinite(L_aug) && std::isfinite(e.qc(k));
    f_std << A(k, 0) << ',' << A(k, 1) << ',' << L_std << ',' << e.qc(k) << ',' << feasible << '\n';
    f_aug << A(k, 0) << ',' << A(k, 1) << ',' << L_aug << ',' << e.qc(k) << ',' << feasible << '\n';
  }

  CheckReport report;
  report.name = "landscape";
  report.artifact_path = artifact_path(out_dir, "landscape_augmented.csv");
  report.add("all_finite", finite ? 1.0 : 0.0);
  report.add("feasible_fraction", feasible_count / static_cast<double>(n));
  report.add("rows", static_cast<double>(n));
  report.pass = finite;
  return report;
}

CheckReport export_landscape(const AgentState& agent, const DualState& d_std,
                             const DualState& d_aug, const GridSpec& grid,
                             const std::string& out_dir) {
  EnergyBatchFn fn = [&agent](const Eigen::MatrixXd& S, const Eigen::MatrixXd& A) {
    return critic_energies(agent, S, A);
  };
  return export_landscape(fn, d_std, d_aug, grid, out_dir);
}

SmallRunResult train_for_episodes(const EnvSpec& spec, const TrainConfig& cfg, Variant variant,
                                  int episodes, std::uint64_t max_env_steps) {
  require(episodes > 0, "train_for_episodes: episodes must be positive");
  Trainer trainer(spec, cfg, variant);
  SmallRunResult out;
  while (out.episodes < episodes && trainer.agent().env_steps < max_env_steps) {
    const EpochStats st = trainer.train_epoch();
    out.episodes += st.episodes_finished;
  }
  out.agent = trainer.agent();
  out.env_steps = trainer.agent().env_steps;
  return out;
}

AgentState run_training(const RunConfig& cfg, const std::string& run_dir) {
  std::filesystem::create_directories(run_dir);
  save_run_config((std::filesystem::path(run_dir) / "config.json").string(), cfg);
  EpochLogger logger((std::filesystem::path(run_dir) / "train_log.csv").string());

  Trainer trainer(cfg.env, cfg.train, cfg.variant);
  const std::uint64_t steps_per_epoch = static_cast<std::uint64_t>(cfg.train.steps_per_epoch);
  const std::uint64_t epochs =
      (cfg.train.total_env_steps + steps_per_epoch - 1) / steps_per_epoch;
  const double dnan = std::numeric_limits<double>::quiet_NaN();

  for (std::uint64_t e = 1; e <= epochs; ++e) {
    const EpochStats st = trainer.train_epoch();
    EpochLogRow row;
    row.epoch = static_cast<std::int64_t>(e);
    row.env_steps = st.env_steps_end;
    row.train_return = st.train_return;
    row.train_episode_cost = st.train_episode_cost;
    row.eval_return = dnan;
    row.eval_episode_cost = dnan;
    row.lambda = st.lambda;
    row.score_loss = st.score_loss;
    row.q_loss = st.q_loss;
    row.qc_loss = st.qc_loss;
    row.mean_ess = st.mean_ess;
    if (e % static_cast<std::uint64_t>(cfg.eval_every_epochs) == 0) {
      const EvalStats ev = evaluate_policy(trainer.agent(), cfg.env, trainer.schedule(),
                                           cfg.eval_episodes, trainer.streams().eval);
      row.eval_return = ev.mean_return;
      row.eval_episode_cost = ev.mean_cost;
    }
    logger.write(row);
    if (e % static_cast<std::uint64_t>(cfg.checkpoint_every_epochs) == 0)
      save_agent((std::filesystem::path(run_dir) / ("checkpoint_epoch_" + std::to_string(e))).string(),
                 trainer.agent(), cfg.env, cfg.train, static_cast<int>(e));
  }
  save_agent((std::filesystem::path(run_dir) / "checkpoint_final").string(), trainer.agent(),
             cfg.env, cfg.train, static_cast<int>(epochs));
  return trainer.agent();
}

namespace {

struct RunMetrics {
  std::uint64_t steps_to_feasible = 0;
  double lambda_var = 0.0;
  double overshoot = 0.0;
};

RunMetrics analyze_run(const std::vector<EpochLogRow>& rows, double h,
                       std::uint64_t never_sentinel) {
  RunMetrics m;
  // Sustained feasibility: env_steps at the first of 5 consecutive
  // evaluations whose mean episode cost is <= h.
  std::vector<std::pair<std::uint64_t, double>> evals;
  for (const EpochLogRow& r : rows)
    if (std::isfinite(r.eval_episode_cost)) evals.emplace_back(r.env_steps, r.eval_episode_cost);
  m.steps_to_feasible = never_sentinel;
  for (std::size_t i = 0; i + 4 < evals.size(); ++i) {
    bool ok = true;
    for (std::size_t j = i; j < i + 5; ++j) ok = ok && evals[j].second <= h;
    if (ok) {
      m.steps_to_feasible = evals[i].first;
      break;
    }
  }
  // Trailing 25% of epochs: population variance of lambda and mean episode
  // cost overshoot.
  const std::size_t start = rows.size() - rows.size() / 4;
  double mean = 0.0;
  std::size_t n = 0;
  for (std::size_t i = start; i < rows.size(); ++i) {
    mean += rows[i].lambda;
    ++n;
  }
  if (n > 0) {
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = start; i < rows.size(); ++i)
      var += (rows[i].lambda - mean) * (rows[i].lambda - mean);
    m.lambda_var = var / static_cast<double>(n);
  }
  double over = 0.0;
  std::size_t n_over = 0;
  for (std::size_t i = start; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i].train_episode_cost)) continue;
    over += std::max(0.0, rows[i].train_episode_cost - h);
    ++n_over;
  }
  m.overshoot = n_over > 0 ? over / static_cast<double>(n_over) : 0.0;
  return m;
}

}  // namespace

CheckReport ab_stability_experiment(const RunConfig& base, const std::vector<std::uint64_t>& seeds,
                                    const std::string& out_dir,
                                    std::vector<SeedOutcome>* outcomes) {
  require(!seeds.empty(), "ab_stability_experiment: need at least one seed");
  std::filesystem::create_directories(out_dir);
  const std::uint64_t never = base.train.total_env_steps + 1;

  std::vector<SeedOutcome> results;
  for (std::uint64_t seed : seeds) {
    SeedOutcome outcome;
    outcome.seed = seed;
    for (Variant variant : {Variant::kStandard, Variant::kAugmented}) {
      RunConfig cfg = base;
      cfg.train.seed = seed;
      cfg.variant = variant;
      const std::string run_dir =
          (std::filesystem::path(out_dir) / (variant_name(variant) + "_seed" + std::to_string(seed)))
              .string();
      cfg.out_dir = run_dir;
      run_training(cfg, run_dir);
      const std::vector<EpochLogRow> rows =
          EpochLogger::read((std::filesystem::path(run_dir) / "train_log.csv").string());
      const RunMetrics m = analyze_run(rows, cfg.env.h, never);
      if (variant == Variant::kStandard) {
        outcome.steps_to_feasible_std = m.steps_to_feasible;
        outcome.lambda_var_std = m.lambda_var;
        outcome.overshoot_std = m.overshoot;
      } else {
        outcome.steps_to_feasible_aug = m.steps_to_feasible;
        outcome.lambda_var_aug = m.lambda_var;
        outcome.overshoot_aug = m.overshoot;
      }
    }
    results.push_back(outcome);
  }

  std::ofstream art = open_artifact(out_dir, "ab_summary.csv");
  art << "seed,steps_to_feasible_std,steps_to_feasible_aug,lambda_var_std,lambda_var_aug,"
         "overshoot_std,overshoot_aug\n";
  int n_no_later = 0, n_lower_var = 0;
  for (const SeedOutcome& o : results) {
    if (o.steps_to_feasible_aug <= o.steps_to_feasible_std) ++n_no_later;
    if (o.lambda_var_aug < o.lambda_var_std) ++n_lower_var;
    art << o.seed << ',' << o.steps_to_feasible_std << ',' << o.steps_to_feasible_aug << ','
        << o.lambda_var_std << ',' << o.lambda_var_aug << ',' << o.overshoot_std << ','
        << o.overshoot_aug << '\n';
  }

  const int need = std::max(1, static_cast<int>(seeds.size()) - 1);
  CheckReport report;
  report.name = "ab_stability";
  report.artifact_path = artifact_path(out_dir, "ab_summary.csv");
  report.add("n_seeds", static_cast<double>(seeds.size()));
  report.add("n_no_later", n_no_later);
  report.add("n_lower_var", n_lower_var);
  report.pass = n_no_later >= need && n_lower_var >= need;
  if (outcomes) *outcomes = results;
  return report;
}

}  // namespace algd
