#include "algd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "algd/config.hpp"
#include "algd/train.hpp"
#include "algd/verify.hpp"

namespace algd {
namespace {

StateVec parse_state(const std::string& text, int d_s) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::invalid_argument("landscape: cannot parse state component '" + cell + "'");
    }
  }
  if (static_cast<int>(values.size()) != d_s)
    throw std::invalid_argument("landscape: state needs " + std::to_string(d_s) +
                                " comma-separated values, got " + std::to_string(values.size()));
  StateVec s(d_s);
  for (int i = 0; i < d_s; ++i) s(i) = values[static_cast<std::size_t>(i)];
  return s;
}

void print_report(const CheckReport& report) {
  std::cout << (report.pass ? "[PASS] " : "[FAIL] ") << report.name;
  for (const auto& [key, value] : report.metrics) std::cout << ' ' << key << '=' << value;
  if (!report.artifact_path.empty()) std::cout << " artifact=" << report.artifact_path;
  std::cout << '\n';
}

void write_reports(const std::string& out_dir, const std::vector<CheckReport>& reports) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckReport& r : reports) arr.push_back(report_to_json(r));
  std::ofstream out(std::filesystem::path(out_dir) / "report.json", std::ios::trunc);
  if (!out) throw std::runtime_error("verify: cannot write report.json in " + out_dir);
  out << arr.dump(2) << "\n";
}

int cmd_train(const std::string& config_path, const std::string& seed_opt,
              const std::string& variant_opt) {
  RunConfig cfg = load_run_config(config_path);
  if (!seed_opt.empty()) cfg.train.seed = std::stoull(seed_opt);
  if (!variant_opt.empty()) cfg.variant = variant_from_name(variant_opt);
  std::cout << "train: env=" << cfg.env.name << " variant=" << variant_name(cfg.variant)
            << " seed=" << cfg.train.seed << " total_env_steps=" << cfg.train.total_env_steps
            << " out=" << cfg.out_dir << '\n';
  run_training(cfg, cfg.out_dir);
  std::cout << "train: done, log at " << cfg.out_dir << "/train_log.csv" << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, int episodes) {
  const LoadedAgent loaded = load_agent(checkpoint);
  const NoiseSchedule sch =
      build_schedule(loaded.cfg.K, loaded.cfg.sigma_min, loaded.cfg.sigma_max);
  RngStream rng(loaded.cfg.seed, 26);
  const EvalStats ev = evaluate_policy(loaded.agent, loaded.spec, sch, episodes, rng);
  std::cout << "eval: episodes=" << episodes << " return=" << ev.mean_return << " +- "
            << ev.sd_return << " episode_cost=" << ev.mean_cost << " +- " << ev.sd_cost
            << " lambda=" << loaded.agent.dual.lambda << '\n';
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& out_dir) {
  std::vector<CheckReport> reports;
  const bool all = suite == "all";
  if (all || suite == "hessian") {
    GridSpec grid;
    reports.push_back(check_hessian_gap(default_hessian_trials(0, 3, 3),
                                        DualState{0.5, 1.0, 1.0, 0.01}, grid, out_dir));
    print_report(reports.back());
  }
  if (all || suite == "boltzmann") {
    GridSpec grid;
    reports.push_back(check_boltzmann_invariance(grid, 0.5, out_dir));
    print_report(reports.back());
  }
  if (all || suite == "mc") {
    RngStream rng(0, 50);
    reports.push_back(
        check_mc_convergence(1.0, 1.0, 0.5, {4, 16, 64, 256, 1024}, 200, rng, out_dir));
    print_report(reports.back());
  }
  if (all || suite == "ab") {
    RunConfig base;
    reports.push_back(ab_stability_experiment(base, {1, 2, 3, 4, 5}, out_dir));
    print_report(reports.back());
  }
  if (reports.empty())
    throw std::invalid_argument("verify: unknown suite '" + suite +
                                "' (expected all|hessian|boltzmann|mc|ab)");
  write_reports(out_dir, reports);
  for (const CheckReport& r : reports)
    if (!r.pass) return 1;
  return 0;
}

int cmd_landscape(const std::string& checkpoint, const std::string& state_text,
                  const std::string& out_dir) {
  const LoadedAgent loaded = load_agent(checkpoint);
  GridSpec grid;
  grid.state = parse_state(state_text, loaded.spec.d_s);
  const CheckReport report =
      export_landscape(loaded.agent, loaded.agent.dual, loaded.agent.dual, grid, out_dir);
  print_report(report);
  write_reports(out_dir, {report});
  return report.pass ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"diffusion policy sampler guided by constrained-RL energies"};
  app.require_subcommand(1);

  std::string config_path, seed_opt, variant_opt;
  CLI::App* train = app.add_subcommand("train", "run training from a config file");
  train->add_option("--config", config_path, "path to run config JSON")->required();
  train->add_option("--seed", seed_opt, "override train.seed");
  train->add_option("--variant", variant_opt, "override variant (standard|augmented)");

  std::string ckpt_path;
  int episodes = 10;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt_path, "checkpoint directory")->required();
  eval->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);

  std::string suite = "all", verify_out = "verify_out";
  CLI::App* verify = app.add_subcommand("verify", "run verification checks");
  verify->add_option("--suite", suite, "all|hessian|boltzmann|mc|ab");
  verify->add_option("--out", verify_out, "artifact directory");

  std::string land_ckpt, land_state, land_out = "landscape_out";
  CLI::App* landscape = app.add_subcommand("landscape", "export energy grids at a state");
  landscape->add_option("--checkpoint", land_ckpt, "checkpoint directory")->required();
  landscape->add_option("--state", land_state, "comma-separated state, e.g. \"0,0,0\"")
      ->required();
  landscape->add_option("--out", land_out, "artifact directory");

  // CLI11's vector overload pops from the back, so it wants reversed argv
  std::vector<std::string> argv_copy(args.rbegin(), args.rend());
  try {
    app.parse(argv_copy);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(config_path, seed_opt, variant_opt);
    if (eval->parsed()) return cmd_eval(ckpt_path, episodes);
    if (verify->parsed()) return cmd_verify(suite, verify_out);
    if (landscape->parsed()) return cmd_landscape(land_ckpt, land_state, land_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << app.help() << std::flush;
  return 2;
}

}  // namespace algd
