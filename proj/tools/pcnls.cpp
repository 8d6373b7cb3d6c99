#include "pcnls/acceptance.hpp"
#include "pcnls/checkpoint.hpp"
#include "pcnls/error.hpp"
#include "pcnls/harness.hpp"
#include "pcnls/seminorm.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pcnls;

namespace
{

ExperimentConfig load(const std::string& path, const std::vector<std::string>& sets)
{
  YAML::Node root = load_config_node(path);
  for (const auto& s : sets)
    apply_override(root, s);
  return parse_config(root);
}

void print_checks(const std::string& label, const RunRecord& rec)
{
  std::cout << label << " [" << rec.config_hash << "] " << rec.steps << " steps, " << rec.rows.size() << " rows\n";
  if (rec.failure)
    std::cout << "  FAILURE " << *rec.failure << "\n";
  for (const auto& c : rec.checks)
  {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.4e (tolerance %.4e)", c.value, c.tolerance);
    std::cout << "  " << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << buf;
    if (!c.detail.empty())
      std::cout << " " << c.detail;
    std::cout << "\n";
  }
}

int cmd_run(const std::vector<std::string>& configs, const std::vector<std::string>& sets, bool write)
{
  std::vector<ExperimentConfig> cfgs;
  for (const auto& path : configs)
  {
    ExperimentConfig cfg = load(path, sets);
    if (!write)
      cfg.output_dir.clear();
    else if (cfg.output_dir.empty())
      throw Error(path + ": output_dir is required for run");
    cfgs.push_back(std::move(cfg));
  }
  const std::vector<RunRecord> recs = run_batch(cfgs);
  bool ok = true;
  for (std::size_t i = 0; i < recs.size(); ++i)
  {
    if (write)
      write_run(recs[i], cfgs[i], cfgs[i].output_dir);
    print_checks(configs[i], recs[i]);
    ok = ok && recs[i].all_passed();
  }
  return ok ? 0 : 1;
}

int cmd_resume(const fs::path& run_dir, const std::string& output, const std::vector<std::string>& sets)
{
  ExperimentConfig cfg = load((run_dir / "config.yaml").string(), sets);
  const fs::path ckpt = latest_checkpoint(run_dir / "checkpoints");
  const Field start = read_checkpoint(ckpt);
  cfg.output_dir = output.empty() ? (run_dir / "resumed").string() : output;
  const RunRecord rec = resume_experiment(cfg, start, ckpt.string());
  write_run(rec, cfg, cfg.output_dir);
  print_checks(run_dir.string() + " from t=" + std::to_string(start.time), rec);
  return rec.all_passed() ? 0 : 1;
}

int cmd_describe(const std::string& path, const std::vector<std::string>& sets)
{
  const ExperimentConfig cfg = load(path, sets);
  std::cout << config_to_yaml(cfg) << "\n# hash " << config_hash(cfg) << "\n";
  const InitialData data =
    make_initial_data(cfg.initial, make_grid(cfg), cfg.indices, cfg.theorem_mode, cfg.seed);
  std::cout << "# data K " << data.K << " (||v0||_X " << data.x_norm << ", inf <x>^n |v0| " << data.inf_weighted
            << ")\n";
  const StepPlan plan = make_plan(cfg);
  std::cout << "# t_end " << plan.t_end << ", b0(N, K) " << threshold_b0(cfg.model.dim, cfg.model.K) << "\n";
  return 0;
}

int cmd_accept(int points, std::optional<double> sigma1, const std::vector<int>& only, const std::string& json_out)
{
  AcceptanceOptions opt;
  opt.points_override = points;
  opt.sigma1_override = sigma1;
  opt.only = only;
  const AcceptanceReport rep = acceptance_suite(opt);
  std::cout << rep.to_text();
  if (!json_out.empty())
  {
    std::ofstream out(json_out);
    out << rep.to_json().dump(2) << "\n";
  }
  return rep.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"pseudo-conformal NLS experiment harness"};
  app.require_subcommand(1);

  std::vector<std::string> sets;
  auto add_set = [&](CLI::App* sub) {
    sub->add_option("--set", sets, "override a config key, dotted.path=value (repeatable)");
  };

  std::vector<std::string> run_configs;
  auto* run_cmd = app.add_subcommand("run", "run experiments and write their run directories");
  run_cmd->add_option("configs", run_configs, "config files")->required()->check(CLI::ExistingFile);
  add_set(run_cmd);

  std::vector<std::string> check_configs;
  auto* check_cmd = app.add_subcommand("check", "run experiments and print the checks without writing output");
  check_cmd->add_option("configs", check_configs, "config files")->required()->check(CLI::ExistingFile);
  add_set(check_cmd);

  std::string run_dir, resume_out;
  auto* resume_cmd = app.add_subcommand("resume", "continue a run from its latest checkpoint");
  resume_cmd->add_option("run_dir", run_dir, "directory of the original run")->required()->check(CLI::ExistingDirectory);
  resume_cmd->add_option("-o,--output", resume_out, "output directory (default <run_dir>/resumed)");
  add_set(resume_cmd);

  std::string describe_path;
  auto* describe_cmd = app.add_subcommand("describe-config", "print the effective config, its hash and K");
  describe_cmd->add_option("config", describe_path, "config file")->required()->check(CLI::ExistingFile);
  add_set(describe_cmd);

  int points = 0;
  std::optional<double> sigma1;
  std::vector<int> only;
  std::string json_out;
  auto* accept_cmd = app.add_subcommand("accept", "run the acceptance suite");
  accept_cmd->add_option("--points", points, "points per axis for every grid");
  accept_cmd->add_option("--sigma1", sigma1, "force sigma_1 in the schedule check");
  accept_cmd->add_option("--only", only, "criteria to run")->delimiter(',');
  accept_cmd->add_option("--json", json_out, "write the machine-readable report here");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*run_cmd)
      return cmd_run(run_configs, sets, true);
    if (*check_cmd)
      return cmd_run(check_configs, sets, false);
    if (*resume_cmd)
      return cmd_resume(run_dir, resume_out, sets);
    if (*describe_cmd)
      return cmd_describe(describe_path, sets);
    if (*accept_cmd)
      return cmd_accept(points, sigma1, only, json_out);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
