#include "pcnls/harness.hpp"

#include "pcnls/checkpoint.hpp"
#include "pcnls/error.hpp"
#include "pcnls/profile.hpp"
#include "pcnls/seminorm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace pcnls
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool dissipative_blowup(const ModelParams& p)
{
  return p.b > 0.0 && p.lambda_re < 0.0;
}

std::string fmt(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

nlohmann::json fit_json(const FitResult& f)
{
  return {{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"r2", f.r2},
          {"window", {f.window.first, f.window.second}}, {"samples", f.samples}};
}

// everything the checks and rows need from one trajectory
struct Analysis
{
  std::vector<double> magnitude;
  std::optional<ProfileSet> profiles;
  std::string profile_error_msg;
  std::optional<MonitorReport> monitor;
  std::string monitor_error_msg;
  std::vector<SeminormTable> tables;
};

Analysis analyse(const Trajectory& tr, const ExperimentConfig& cfg)
{
  Analysis a;
  const auto& p = tr.params;
  if (dissipative_blowup(p))
    a.magnitude = magnitude_identity_residual(tr);

  if (cfg.indices.J <= kMaxMonitorOrder)
  {
    std::vector<double> sups;
    for (const auto& s : tr.snapshots)
    {
      a.tables.push_back(seminorms(s, cfg.indices));
      sups.push_back(sup_norm(s));
    }
    try
    {
      const SigmaSchedule sched = sigma_schedule(p, cfg.indices);
      a.monitor = monitors_from_tables(a.tables, sups, p, sched, cfg.indices);
    }
    catch (const Error& e)
    {
      a.monitor_error_msg = e.what();
    }
  }
  else
    a.monitor_error_msg = "J above the largest monitored derivative order";

  if (dissipative_blowup(p) && p.nu() > 0.0)
  {
    try
    {
      a.profiles = build_profiles(tr, cfg.indices);
    }
    catch (const Error& e)
    {
      a.profile_error_msg = e.what();
    }
  }
  else
    a.profile_error_msg = "profiles need b > 0, Re lambda < 0 and alpha < 2/N";
  return a;
}

void build_rows(RunRecord& rec, const Trajectory& tr, const Analysis& a, const ExperimentConfig& cfg)
{
  const auto& idx = cfg.indices;
  const int J = idx.J;
  const int start2 = 2 * idx.m + 1;
  const int start3 = 2 * idx.m + 3 + idx.k;
  auto& cols = rec.columns;
  cols = {"t", "distance", "sup_norm", "l2_norm", "mass_ledger_residual", "magnitude_residual", "f_sup",
          "dissipation"};
  const bool with_tables = !a.tables.empty();
  if (with_tables)
  {
    for (int l = 0; l <= J; ++l)
      cols.push_back("fam1_" + std::to_string(l));
    for (int l = start2; l <= J; ++l)
      cols.push_back("fam2_" + std::to_string(l));
    for (int l = start3; l <= J; ++l)
      cols.push_back("fam3_" + std::to_string(l));
    for (const char* c : {"x_norm", "inf_weighted", "spectral_tail"})
      cols.push_back(c);
  }
  for (const char* c : {"phi1", "phi2", "phi3", "phi4", "psi_running", "bound_4K_ok", "decay_bound_ok"})
    cols.push_back(c);

  for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
  {
    const Field& snap = tr.snapshots[s];
    std::vector<double> row;
    row.reserve(cols.size());
    row.push_back(snap.time);
    row.push_back(tr.distance(s));
    row.push_back(sup_norm(snap));
    row.push_back(l2_norm(snap));
    row.push_back(tr.mass_ledger_residual(s));
    row.push_back(a.magnitude.empty() ? kNaN : a.magnitude[s]);
    const auto f = tr.f_field(s);
    double fs = 0.0;
    for (double x : f)
      fs = std::max(fs, std::abs(x));
    row.push_back(fs);
    row.push_back(tr.dissipation[s]);
    if (with_tables)
    {
      const auto& t = a.tables[s];
      for (int l = 0; l <= J; ++l)
        row.push_back(t.fam1[l]);
      for (int l = start2; l <= J; ++l)
        row.push_back(t.fam2[l]);
      for (int l = start3; l <= J; ++l)
        row.push_back(t.fam3[l]);
      row.push_back(t.x_norm);
      row.push_back(t.inf_weighted);
      row.push_back(t.spectral_tail);
    }
    if (a.monitor)
    {
      const auto& m = a.monitor->rows[s];
      for (double x : {m.phi1, m.phi2, m.phi3, m.phi4, m.psi_running})
        row.push_back(x);
      row.push_back(m.bound_4K_ok ? 1.0 : 0.0);
      row.push_back(m.decay_bound_ok ? 1.0 : 0.0);
    }
    else
      for (int k = 0; k < 7; ++k)
        row.push_back(kNaN);
    rec.rows.push_back(std::move(row));
  }
}

CheckResult check_mass_balance(const Trajectory& tr)
{
  CheckResult c;
  c.name = "mass_balance";
  c.tolerance = tr.params.lambda_re == 0.0 ? 1e-8 : 1e-6;
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
    c.value = std::max(c.value, tr.mass_ledger_residual(s));
  c.passed = c.value < c.tolerance;
  c.detail = "max relative ledger residual " + fmt(c.value);
  return c;
}

CheckResult check_magnitude(const Analysis& a)
{
  CheckResult c;
  c.name = "magnitude_identity";
  c.tolerance = 1e-3;
  if (a.magnitude.empty())
    throw Error("magnitude identity needs b > 0 and Re lambda < 0");
  c.value = *std::max_element(a.magnitude.begin(), a.magnitude.end());
  c.passed = c.value < c.tolerance;
  c.detail = "max residual on the inner half-domain " + fmt(c.value);
  return c;
}

CheckResult check_sup_limit(const Trajectory& tr, RunRecord& rec)
{
  CheckResult c;
  c.name = "sup_limit";
  const SupLimitResult r = sup_limit_check(tr);
  c.tolerance = 0.15;
  c.value = r.final_deviation;
  c.passed = r.final_deviation < 0.15 && r.decreasing;
  c.detail = "target " + fmt(r.target) + ", final deviation " + fmt(r.final_deviation) +
             ", last-decade trend exponent " + fmt(r.trend.exponent) + (r.decreasing ? " (decreasing)" : " (not decreasing)");
  rec.fits["sup_limit"] = {{"target", r.target}, {"final_deviation", r.final_deviation},
                           {"decreasing", r.decreasing}, {"trend", fit_json(r.trend)}};
  return c;
}

CheckResult check_l2_rate(const Trajectory& tr, const Analysis& a, const ExperimentConfig& cfg, RunRecord& rec)
{
  CheckResult c;
  c.name = "l2_rate";
  if (!a.profiles)
    throw Error(a.profile_error_msg);
  const L2RateResult r = l2_rate_check(tr, *a.profiles, cfg.indices);
  const double rel = std::abs(r.solver.exponent - r.target_exponent) / r.target_exponent;
  const double gap = std::abs(r.solver.exponent - r.profile.exponent);
  c.value = rel;
  c.tolerance = 0.3;
  c.passed = rel <= 0.3 && gap <= 0.005;
  c.detail = "target " + fmt(r.target_exponent) + ", solver " + fmt(r.solver.exponent) + ", profile quadrature " +
             fmt(r.profile.exponent) + ", two-route gap " + fmt(gap) + " (bound 0.005)";
  rec.fits["l2_rate"] = {{"target_exponent", r.target_exponent}, {"solver", fit_json(r.solver)},
                         {"profile", fit_json(r.profile)}, {"relative_error", rel}, {"two_route_gap", gap}};
  return c;
}

CheckResult check_profile_error(const Trajectory& tr, const Analysis& a, const ExperimentConfig& cfg, RunRecord& rec)
{
  CheckResult c;
  c.name = "profile_error";
  if (!a.profiles)
    throw Error(a.profile_error_msg);
  const ProfileErrorResult r = profile_error(tr, *a.profiles, cfg.indices, 2e-3, 1e-2);
  if (r.fit.samples < 2)
    throw Error("profile error: fewer than two snapshots in the fit window");
  c.value = r.fit.exponent;
  c.tolerance = 0.4;
  c.passed = r.fit.exponent >= 0.4;
  c.detail = "fitted exponent " + fmt(r.fit.exponent) + " over " + std::to_string(r.fit.samples) + " snapshots";
  rec.fits["profile_error"] = fit_json(r.fit);
  return c;
}

CheckResult check_profile_algebra(const Trajectory& tr, const Analysis& a, RunRecord& rec)
{
  CheckResult c;
  c.name = "profile_algebra";
  if (!a.profiles)
    throw Error(a.profile_error_msg);
  const ProfileAlgebraResult r = profile_algebra(tr, *a.profiles);
  c.value = std::max(r.modulus_defect, r.phase_defect);
  c.tolerance = 1e-12;
  const bool sandwich_ok = !r.sandwich_applicable || r.sandwich_holds;
  c.passed = c.value <= 1e-12 && r.omega0_defect < 1e-2 && sandwich_ok;
  c.detail = "modulus " + fmt(r.modulus_defect) + ", phase " + fmt(r.phase_defect) + ", omega0 identity " +
             fmt(r.omega0_defect) + " (bound 1e-2), ||f0||_inf " + fmt(r.f0_sup) +
             (r.sandwich_applicable ? (r.sandwich_holds ? ", sandwich holds" : ", sandwich fails")
                                    : ", sandwich not asserted");
  rec.fits["profile_algebra"] = {{"modulus_defect", r.modulus_defect}, {"phase_defect", r.phase_defect},
                                 {"omega0_defect", r.omega0_defect}, {"f0_sup", r.f0_sup},
                                 {"sandwich_applicable", r.sandwich_applicable},
                                 {"sandwich_holds", r.sandwich_holds}};
  return c;
}

CheckResult check_monitors(const Analysis& a, const ModelParams& p, RunRecord& rec)
{
  CheckResult c;
  c.name = "monitors";
  if (!a.monitor)
    throw Error(a.monitor_error_msg);
  const auto& m = *a.monitor;
  bool decay_ok = true;
  for (const auto& row : m.rows)
    decay_ok = decay_ok && row.decay_bound_ok;
  c.value = m.PsiT;
  c.tolerance = 4.0 * p.K;
  c.passed = m.bound_4K_ok && (!m.decay_bound_applicable || decay_ok);
  c.detail = "Psi_T " + fmt(m.PsiT) + " against 4K = " + fmt(4.0 * p.K) +
             (m.first_violation_time ? ", first exceeded at t = " + fmt(*m.first_violation_time) : std::string()) +
             (m.decay_bound_applicable ? (decay_ok ? ", decay bound holds" : ", decay bound violated")
                                       : ", decay bound not asserted (b < b0)");
  rec.fits["monitors"] = {{"Phi1", m.Phi1}, {"Phi2", m.Phi2}, {"Phi3", m.Phi3}, {"Phi4", m.Phi4},
                          {"PsiT", m.PsiT}, {"bound_4K_ok", m.bound_4K_ok},
                          {"decay_bound_applicable", m.decay_bound_applicable}, {"decay_bound_ok", decay_ok}};
  return c;
}

CheckResult check_schedule(const ExperimentConfig& cfg, RunRecord& rec)
{
  CheckResult c;
  c.name = "schedule";
  const SigmaSchedule s = sigma_schedule(cfg.model, cfg.indices);
  const double mismatch = sigma_closed_form_mismatch(s, cfg.model, cfg.indices);
  const double sJ = s[s.J()];
  c.value = mismatch;
  c.tolerance = 1e-12;
  c.passed = mismatch <= 1e-12 && sJ <= 0.5 && schedule_is_monotone(s);
  c.detail = "closed-form mismatch " + fmt(mismatch) + ", sigma_J " + fmt(sJ);
  rec.fits["schedule"] = {{"sigma_1", s[1]}, {"sigma_J", sJ}, {"closed_form_mismatch", mismatch}};
  return c;
}

RunRecord execute(const ExperimentConfig& cfg, const std::optional<Field>& start, const std::string& source)
{
  RunRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.resumed_from = source;
  const std::filesystem::path out_dir = cfg.output_dir;
  try
  {
    const Grid grid = make_grid(cfg);
    const InitialData data = make_initial_data(cfg.initial, grid, cfg.indices, cfg.theorem_mode, cfg.seed);
    rec.data_K = data.K;
    ModelParams p = cfg.model;
    if (!cfg.K_given)
      p.K = data.K;

    StepPlan plan = make_plan(cfg);
    Field v0 = data.field;
    if (start)
    {
      if (!(start->grid == grid))
        throw Error("resume: checkpoint grid does not match the config");
      v0 = *start;
      plan.t_start = start->time;
      if (!(plan.t_start < plan.t_end))
        throw Error("resume: checkpoint is already at the end time");
    }
    if (plan.equation == Equation::nonautonomous && p.b > 0.0)
      for (double r : {1e-1, 1e-2, 2e-3})
      {
        const double tl = time_at_distance(p.b, r);
        if (tl > plan.t_start && tl < plan.t_end)
          plan.landmarks.push_back(tl);
      }

    if (dissipative_blowup(p))
    {
      try
      {
        const ThresholdConfig th = thresholds(p, cfg.indices);
        rec.fits["thresholds"] = {{"alpha1", th.alpha1}, {"alpha1_gap", th.alpha1_gap}, {"b0", th.b0},
                                  {"b1", th.b1}, {"theorem_regime", th.theorem_regime}};
      }
      catch (const Error& e)
      {
        rec.fits["thresholds"] = {{"error", e.what()}};
      }
    }

    SnapshotObserver observer;
    const std::filesystem::path ckpt_dir = out_dir / "checkpoints";
    if (!cfg.output_dir.empty())
    {
      if (std::filesystem::exists(out_dir / "rows.csv"))
        throw Error("output directory already holds a run: " + out_dir.string());
      std::filesystem::create_directories(ckpt_dir);
      const auto every = static_cast<std::size_t>(cfg.plan.checkpoint_every);
      observer = [&, every](const Field& f, std::size_t index) {
        if (every > 0 && index > 0 && index % every == 0)
        {
          char name[32];
          std::snprintf(name, sizeof name, "snap_%07zu.ckpt", index);
          write_checkpoint(ckpt_dir / name, f);
        }
      };
    }

    const Trajectory tr = run(v0, plan, p, cfg.theorem_mode, cfg.indices.n, observer);
    rec.steps = tr.steps_taken;
    if (!cfg.output_dir.empty())
      write_checkpoint(ckpt_dir / "final.ckpt", tr.snapshots.back());

    const Analysis a = analyse(tr, cfg);
    build_rows(rec, tr, a, cfg);
    if (a.profiles)
    {
      rec.omega0 = a.profiles->omega0;
      Field f0(grid, tr.snapshots.back().time);
      for (std::size_t i = 0; i < f0.size(); ++i)
        f0.values[i] = a.profiles->f0[i];
      rec.f0 = f0;
    }

    for (const auto& name : cfg.checks)
    {
      try
      {
        if (name == "mass_balance")
          rec.checks.push_back(check_mass_balance(tr));
        else if (name == "magnitude_identity")
          rec.checks.push_back(check_magnitude(a));
        else if (name == "sup_limit")
          rec.checks.push_back(check_sup_limit(tr, rec));
        else if (name == "l2_rate")
          rec.checks.push_back(check_l2_rate(tr, a, cfg, rec));
        else if (name == "profile_error")
          rec.checks.push_back(check_profile_error(tr, a, cfg, rec));
        else if (name == "profile_algebra")
          rec.checks.push_back(check_profile_algebra(tr, a, rec));
        else if (name == "monitors")
          rec.checks.push_back(check_monitors(a, p, rec));
        else if (name == "schedule")
          rec.checks.push_back(check_schedule(cfg, rec));
      }
      catch (const Error& e)
      {
        rec.checks.push_back({name, false, kNaN, kNaN, std::string("not evaluated: ") + e.what()});
      }
    }
  }
  catch (const SimulationAborted& e)
  {
    rec.failure = std::string(e.what()) + " (t = " + fmt(e.time()) + ")";
  }
  catch (const Error& e)
  {
    rec.failure = e.what();
  }
  return rec;
}

} // namespace

bool RunRecord::all_passed() const
{
  if (failure)
    return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunRecord run_experiment(const ExperimentConfig& cfg)
{
  return execute(cfg, std::nullopt, "");
}

RunRecord resume_experiment(const ExperimentConfig& cfg, const Field& start, const std::string& source)
{
  return execute(cfg, start, source);
}

std::string rows_csv(const RunRecord& rec)
{
  std::string out;
  for (std::size_t c = 0; c < rec.columns.size(); ++c)
  {
    out += rec.columns[c];
    out += c + 1 < rec.columns.size() ? ',' : '\n';
  }
  char buf[40];
  for (const auto& row : rec.rows)
  {
    for (std::size_t c = 0; c < row.size(); ++c)
    {
      if (std::isnan(row[c]))
        out += "nan";
      else
      {
        std::snprintf(buf, sizeof buf, "%.17e", row[c]);
        out += buf;
      }
      out += c + 1 < row.size() ? ',' : '\n';
    }
  }
  return out;
}

nlohmann::json summary_json(const RunRecord& rec, const ExperimentConfig& cfg)
{
  nlohmann::json j;
  j["config_hash"] = rec.config_hash;
  j["config"] = config_to_json(cfg);
  j["data_K"] = std::isfinite(rec.data_K) ? nlohmann::json(rec.data_K) : nlohmann::json(nullptr);
  j["steps"] = rec.steps;
  j["snapshots"] = rec.rows.size();
  j["fits"] = rec.fits;
  j["failure"] = rec.failure ? nlohmann::json(*rec.failure) : nlohmann::json(nullptr);
  if (!rec.resumed_from.empty())
    j["resumed_from"] = rec.resumed_from;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rec.checks)
  {
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", num(c.value)},
                      {"tolerance", num(c.tolerance)}, {"detail", c.detail}});
  }
  j["checks"] = checks;
  j["all_passed"] = rec.all_passed();
  return j;
}

void write_run(const RunRecord& rec, const ExperimentConfig& cfg, const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  if (std::filesystem::exists(dir / "rows.csv"))
    throw Error("write_run: " + (dir / "rows.csv").string() + " exists; run records are append-only");
  auto write_text = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("write_run: cannot write " + path.string());
    out << text;
  };
  write_text(dir / "config.yaml", config_to_yaml(cfg));
  write_text(dir / "rows.csv", rows_csv(rec));
  write_text(dir / "summary.json", summary_json(rec, cfg).dump(2) + "\n");
  if (rec.omega0)
    write_checkpoint(dir / "profile_omega0.bin", *rec.omega0);
  if (rec.f0)
    write_checkpoint(dir / "profile_f0.bin", *rec.f0);
}

int worker_slots()
{
  const char* env = std::getenv("PCNLS_WORKERS");
  if (!env || !*env)
    return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1)
    throw Error("PCNLS_WORKERS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

std::vector<RunRecord> run_batch(const std::vector<ExperimentConfig>& cfgs)
{
  std::vector<RunRecord> out(cfgs.size());
  const int slots = std::min<int>(worker_slots(), static_cast<int>(std::max<std::size_t>(cfgs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cfgs.size(); i = next++)
      out[i] = run_experiment(cfgs[i]);
  };
  std::vector<std::thread> pool;
  for (int s = 1; s < slots; ++s)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();
  return out;
}

} // namespace pcnls
