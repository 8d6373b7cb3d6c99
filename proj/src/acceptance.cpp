#include "pcnls/acceptance.hpp"

#include "pcnls/domain_core.hpp"
#include "pcnls/error.hpp"
#include "pcnls/harness.hpp"
#include "pcnls/integrator.hpp"
#include "pcnls/profile.hpp"
#include "pcnls/spectral.hpp"
#include "pcnls/transform.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>

namespace pcnls
{

namespace
{

std::string sci(double x, int digits = 3)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

std::string fixed(double x, int digits = 4)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

CriterionResult criterion(int id, std::string name)
{
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

int pts(const AcceptanceOptions& opt, int def)
{
  return opt.points_override > 0 ? opt.points_override : def;
}

// desk configuration: N = 1, lambda = -1, alpha = 1.8, b = 4, v0 = <x>^{-2},
// L = 20, M = 2048, stop at 1 - bt = 1e-3
ModelParams desk_params()
{
  return ModelParams{};
}

Field bracket_data(const Grid& g, int power)
{
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values[i] = std::pow(japanese(g, i), -power);
  return f;
}

Field gaussian(const Grid& g)
{
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values[i] = std::exp(-0.5 * g.radius_squared(i));
  return f;
}

StepPlan desk_plan(const ModelParams& p)
{
  StepPlan plan;
  plan.equation = Equation::nonautonomous;
  plan.dt = 1e-4;
  plan.adapt = true;
  plan.adapt_c = 0.05;
  plan.t_end = time_at_distance(p.b, 1e-3);
  for (double r : {1e-1, 1e-2, 2e-3})
    plan.landmarks.push_back(time_at_distance(p.b, r));
  return plan;
}

ExperimentConfig desk_config(const AcceptanceOptions& opt)
{
  ExperimentConfig cfg;
  cfg.model = desk_params();
  cfg.indices = IndexSet::defaults_for(1);
  cfg.grid.half_width = 20.0;
  cfg.grid.points = pts(opt, 2048);
  cfg.plan.dt = 1e-4;
  cfg.plan.stop_distance = 1e-3;
  cfg.initial.family = "power_decay";
  cfg.initial.power = 2;
  cfg.checks = {"mass_balance", "magnitude_identity", "profile_error", "profile_algebra"};
  return cfg;
}

// desk trajectory shared by several criteria
class Desk
{
public:
  explicit Desk(const AcceptanceOptions& opt) : opt_(opt) {}

  const Trajectory& traj()
  {
    if (!traj_)
    {
      const ModelParams p = desk_params();
      const Grid g(1, 20.0, pts(opt_, 2048));
      traj_ = run(bracket_data(g, 2), desk_plan(p), p, true, 2);
    }
    return *traj_;
  }

  const ProfileSet& profiles()
  {
    if (!prof_)
      prof_ = build_profiles(traj(), IndexSet::defaults_for(1));
    return *prof_;
  }

private:
  AcceptanceOptions opt_;
  std::optional<Trajectory> traj_;
  std::optional<ProfileSet> prof_;
};

// ---------------------------------------------------------------- criteria

CriterionResult free_propagator(const AcceptanceOptions& opt)
{
  CriterionResult r = criterion(1, "free propagator vs Gaussian closed form");
  const Grid g(1, 20.0, pts(opt, 1024));
  const double t = 1.0;
  const Field u = free_propagate(gaussian(g), t);
  double err = 0.0;
  const cplx d(1.0, 2.0 * t);
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    const cplx exact = std::pow(d, -0.5) * std::exp(-g.radius_squared(i) / (2.0 * d));
    err = std::max(err, std::abs(u.values[i] - exact));
  }
  r.measured = "sup error " + sci(err);
  r.tolerance = "< 1e-8";
  r.passed = err < 1e-8;
  return r;
}

CriterionResult splitting_order(const AcceptanceOptions& opt)
{
  CriterionResult r = criterion(2, "Strang splitting order (Richardson)");
  const ModelParams p = desk_params();
  const Grid g(1, 20.0, pts(opt, 2048));
  const Field v0 = bracket_data(g, 2);
  std::vector<Field> finals;
  for (double dt : {1e-2, 5e-3, 2.5e-3})
  {
    StepPlan plan;
    plan.dt = dt;
    plan.adapt = false;
    plan.t_end = 0.2;
    plan.snapshot_stride = 1 << 30;
    finals.push_back(run(v0, plan, p).snapshots.back());
  }
  const double e1 = max_abs_diff(finals[0], finals[1]);
  const double e2 = max_abs_diff(finals[1], finals[2]);
  const double order = std::log2(e1 / e2);
  r.measured = "order " + fixed(order, 3) + " (differences " + sci(e1, 2) + ", " + sci(e2, 2) + ")";
  r.tolerance = "2.0 +- 0.2";
  r.passed = std::abs(order - 2.0) <= 0.2;
  r.note = "fixed steps to t = 0.2 (1 - bt = 0.2)";
  return r;
}

CriterionResult exact_substep(const AcceptanceOptions&)
{
  namespace ode = boost::numeric::odeint;
  CriterionResult r = criterion(3, "exact nonlinear substep vs scalar ODE integrator");
  using State = std::array<double, 2>;
  const std::array<cplx, 5> z0s = {cplx(0.1, 0.0), std::polar(0.7, 0.3), cplx(1.0, 0.0), std::polar(3.0, -1.1),
                                   std::polar(10.0, 2.0)};
  const std::array<double, 5> taus = {0.0, 0.01, 0.3, 2.0, 10.0};
  const std::array<std::pair<cplx, double>, 4> models = {
    std::pair{cplx(-1.0, 0.0), 2.0}, std::pair{cplx(-1.0, 1.0), 1.0}, std::pair{cplx(-0.5, -2.0), 1.8},
    std::pair{cplx(0.0, -0.25), 0.5}};

  double worst = 0.0;
  int count = 0;
  for (const auto& [lambda, alpha] : models)
  {
    ModelParams p;
    p.lambda_re = lambda.real();
    p.lambda_im = lambda.imag();
    p.alpha = alpha;
    p.b = 0.0;
    auto rhs = [&](const State& x, State& dx, double) {
      const cplx z(x[0], x[1]);
      const cplx dz = lambda * std::pow(std::abs(z), alpha) * z;
      dx = {dz.real(), dz.imag()};
    };
    for (const auto& z0 : z0s)
      for (double tau : taus)
      {
        State x = {z0.real(), z0.imag()};
        if (tau > 0.0)
          ode::integrate_adaptive(ode::make_controlled(1e-15, 1e-15, ode::runge_kutta_fehlberg78<State>()), rhs, x,
                                  0.0, tau, 1e-4);
        const cplx closed = nonlinear_flow(z0, tau, p);
        worst = std::max(worst, std::abs(closed - cplx(x[0], x[1])));
        ++count;
      }
  }
  r.measured = "max pointwise error " + sci(worst) + " over " + std::to_string(count) + " lattice points";
  r.tolerance = "< 1e-10";
  r.passed = worst < 1e-10;
  return r;
}

CriterionResult mass_ledger(const AcceptanceOptions& opt, Desk& desk)
{
  CriterionResult r = criterion(4, "mass-dissipation ledger");
  const Trajectory& tr = desk.traj();
  double worst = 0.0;
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
    worst = std::max(worst, tr.mass_ledger_residual(s));

  ModelParams p = desk_params();
  p.lambda_re = 0.0;
  p.lambda_im = -1.0;
  p.b = 0.0;
  const Grid g(1, 20.0, pts(opt, 2048));
  StepPlan plan;
  plan.equation = Equation::autonomous;
  plan.dt = 1e-3;
  plan.t_end = 1.0;
  plan.adapt = false;
  plan.snapshot_stride = 10;
  const Trajectory cons = run(bracket_data(g, 2), plan, p);
  double drift = 0.0;
  for (std::size_t s = 0; s < cons.snapshots.size(); ++s)
    drift = std::max(drift, cons.mass_ledger_residual(s));

  r.measured = "desk residual " + sci(worst) + ", Re lambda = 0 drift " + sci(drift);
  r.tolerance = "< 1e-6 and < 1e-8";
  r.passed = worst < 1e-6 && drift < 1e-8;
  return r;
}

CriterionResult magnitude_identity(Desk& desk)
{
  CriterionResult r = criterion(5, "magnitude identity on the inner half-domain");
  const auto res = magnitude_identity_residual(desk.traj());
  const double worst = *std::max_element(res.begin(), res.end());
  r.measured = "max residual " + sci(worst) + " over " + std::to_string(res.size()) + " snapshots";
  r.tolerance = "< 1e-3";
  r.passed = worst < 1e-3;
  return r;
}

CriterionResult equivalence(const AcceptanceOptions& opt)
{
  CriterionResult r = criterion(6, "pseudo-conformal equivalence of u and v simulations");
  const std::vector<double> times = {0.25, 1.0, 4.0};

  // nonlinear desk data; the u box must be wide enough that periodic
  // re-entry of the outgoing tail stays below the tolerance up to t = 4
  ModelParams p = desk_params();
  EquivalenceOptions eo;
  eo.v_grid = Grid(1, 20.0, pts(opt, 2048));
  eo.u_grid = Grid(1, 900.0, opt.points_override > 0 ? opt.points_override : (1 << 21));
  eo.v_dt = 1e-4;
  eo.u_dt = 1e-2;
  const auto nl = equivalence_test([](const Grid& g) { return bracket_data(g, 2); }, p, times, eo);

  ModelParams lin = p;
  lin.lambda_re = 0.0;
  EquivalenceOptions lo;
  lo.v_grid = Grid(1, 20.0, pts(opt, 2048));
  lo.u_grid = Grid(1, 288.0, opt.points_override > 0 ? opt.points_override : (1 << 18));
  lo.v_dt = 1e-3;
  lo.u_dt = 0.25; // the linear flow is exact for any step
  lo.v_modulus_floor = 0.0;
  const auto ln = equivalence_test(gaussian, lin, times, lo);

  double worst_nl = 0.0, worst_ln = 0.0;
  std::string per_time;
  for (std::size_t i = 0; i < times.size(); ++i)
  {
    worst_nl = std::max(worst_nl, nl[i].discrepancy);
    worst_ln = std::max(worst_ln, ln[i].discrepancy);
    per_time += (i ? ", " : "") + std::string("t=") + fixed(times[i], 2) + ": " + sci(nl[i].discrepancy, 2);
  }
  r.measured = "desk " + per_time + "; lambda = 0 Gaussian max " + sci(worst_ln, 2);
  r.tolerance = "< 1e-4 and < 1e-7";
  r.passed = worst_nl < 1e-4 && worst_ln < 1e-7;
  return r;
}

CriterionResult sup_limit(Desk& desk)
{
  CriterionResult r = criterion(7, "sup-norm limit");
  const SupLimitResult s = sup_limit_check(desk.traj());

  ModelParams q = desk_params();
  q.b = 1.0;
  const double target = ode_limit_value(q);
  const double scaled = ode_scaled_modulus(cplx(1.0, 0.0), 1e-6, q);
  const double ode_dev = std::abs(scaled - target) / target;

  r.measured = "desk deviation " + fixed(s.final_deviation, 4) + (s.decreasing ? " (decreasing" : " (not decreasing") +
               ", trend exponent " + fixed(s.trend.exponent, 3) + "); ODE deviation at 1-bt=1e-6 " + fixed(ode_dev, 4);
  r.tolerance = "< 0.15 and decreasing; ODE < 0.01";
  r.passed = s.final_deviation < 0.15 && s.decreasing && ode_dev < 0.01;
  r.note = "target " + fixed(s.target, 4);
  return r;
}

CriterionResult l2_rate(Desk& desk)
{
  CriterionResult r = criterion(8, "L2 decay rate");
  const IndexSet idx = IndexSet::defaults_for(1);
  const L2RateResult l = l2_rate_check(desk.traj(), desk.profiles(), idx);
  const double rel = std::abs(l.solver.exponent - l.target_exponent) / l.target_exponent;
  const double gap = std::abs(l.solver.exponent - l.profile.exponent);
  r.measured = "solver exponent " + fixed(l.solver.exponent, 5) + " (target " + fixed(l.target_exponent, 6) +
               ", relative error " + fixed(rel, 3) + "), profile quadrature " + fixed(l.profile.exponent, 5) +
               " (gap " + sci(gap, 2) + ")";
  r.tolerance = "within 30% of target and gap <= 0.005";
  r.passed = rel <= 0.3 && gap <= 0.005;
  return r;
}

CriterionResult profile_error_law(Desk& desk)
{
  CriterionResult r = criterion(9, "profile error law");
  const ProfileErrorResult e = profile_error(desk.traj(), desk.profiles(), IndexSet::defaults_for(1), 2e-3, 1e-2);
  r.measured = "fitted exponent " + fixed(e.fit.exponent, 3) + " over " + std::to_string(e.fit.samples) +
               " snapshots (r2 " + fixed(e.fit.r2, 4) + ")";
  r.tolerance = ">= 0.4";
  r.passed = e.fit.samples >= 2 && e.fit.exponent >= 0.4;
  return r;
}

CriterionResult algebra(const AcceptanceOptions& opt, Desk& desk)
{
  CriterionResult r = criterion(10, "profile algebra invariants");
  const ProfileAlgebraResult a = profile_algebra(desk.traj(), desk.profiles());

  // complex lambda gives a non-trivial phase theta
  ModelParams p = desk_params();
  p.lambda_im = 0.5;
  const Grid g(1, 20.0, pts(opt, 2048));
  const Trajectory tr = run(bracket_data(g, 2), desk_plan(p), p, true, 2);
  const ProfileSet prof = build_profiles(tr, IndexSet::defaults_for(1));
  const ProfileAlgebraResult c = profile_algebra(tr, prof);

  auto ok = [](const ProfileAlgebraResult& x) {
    return x.modulus_defect <= 1e-12 && x.phase_defect <= 1e-12 && x.omega0_defect < 1e-2 &&
           (!x.sandwich_applicable || x.sandwich_holds);
  };
  auto describe = [](const ProfileAlgebraResult& x) {
    return "modulus " + sci(x.modulus_defect, 1) + ", phase " + sci(x.phase_defect, 1) + ", omega0 identity " +
           sci(x.omega0_defect, 2) + ", ||f0|| " + fixed(x.f0_sup, 3) +
           (x.sandwich_applicable ? (x.sandwich_holds ? ", sandwich holds" : ", sandwich FAILS") : ", sandwich n/a");
  };
  r.measured = "desk: " + describe(a) + "; lambda = -1+0.5i: " + describe(c);
  r.tolerance = "1e-12, 1e-12, < 1e-2, (2/3, 2) sandwich when ||f0|| <= 1/2";
  r.passed = ok(a) && ok(c);
  return r;
}

CriterionResult schedule(const AcceptanceOptions& opt)
{
  CriterionResult r = criterion(11, "sigma schedule and thresholds");
  double worst = 0.0, max_sigma = 0.0;
  bool monotone = true;
  int samples = 0;
  for (int N = 1; N <= 3; ++N)
  {
    const IndexSet idx = IndexSet::defaults_for(N);
    for (int k = 0; k < 100; ++k)
    {
      ModelParams p;
      p.dim = N;
      p.alpha = 1.5 / N + (0.5 / N) * k / 99.0;
      const double s1 = opt.sigma1_override ? *opt.sigma1_override : sigma_one(p, idx);
      const SigmaSchedule s = sigma_schedule_from(s1, p, idx);
      worst = std::max(worst, sigma_closed_form_mismatch(s, p, idx));
      max_sigma = std::max(max_sigma, s[s.J()]);
      monotone = monotone && schedule_is_monotone(s);
      ++samples;
    }
  }
  const double b0_1 = threshold_b0(1, 1.0);
  const double b0_2 = threshold_b0(2, 1.0);
  r.measured = "closed-form mismatch " + sci(worst, 2) + ", max sigma_J " + fixed(max_sigma, 6) + " over " +
               std::to_string(samples) + " alphas, b0 = " + fixed(b0_1, 0) + " (N=1), " + fixed(b0_2, 0) + " (N=2)";
  r.tolerance = "<= 1e-12, <= 1/2, 65536 and 2048 exactly";
  r.passed = worst <= 1e-12 && max_sigma <= 0.5 && monotone && b0_1 == 65536.0 && b0_2 == 2048.0;
  if (opt.sigma1_override)
    r.note = "sigma_1 forced to " + sci(*opt.sigma1_override, 6);
  return r;
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

CriterionResult determinism(const AcceptanceOptions& opt)
{
  CriterionResult r = criterion(12, "determinism of row files");
  std::filesystem::path base = opt.scratch_dir;
  if (base.empty())
  {
    std::random_device rd;
    base = std::filesystem::temp_directory_path() / ("pcnls-accept-" + std::to_string(rd()));
  }
  std::filesystem::create_directories(base);
  std::vector<std::string> contents;
  for (const char* name : {"first", "second"})
  {
    ExperimentConfig cfg = desk_config(opt);
    const std::filesystem::path dir = base / name;
    std::filesystem::remove_all(dir);
    cfg.output_dir = dir.string();
    const RunRecord rec = run_experiment(cfg);
    if (rec.failure)
      throw Error("determinism run failed: " + *rec.failure);
    write_run(rec, cfg, dir);
    contents.push_back(slurp(dir / "rows.csv"));
  }
  const bool same = contents[0] == contents[1] && !contents[0].empty();
  r.measured = same ? "rows.csv identical (" + std::to_string(contents[0].size()) + " bytes)" : "rows.csv differ";
  r.tolerance = "byte-identical";
  r.passed = same;
  if (opt.scratch_dir.empty())
    std::filesystem::remove_all(base);
  return r;
}

} // namespace

bool AcceptanceReport::all_passed() const
{
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

nlohmann::json AcceptanceReport::to_json() const
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : criteria)
    j.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"measured", c.measured},
                 {"tolerance", c.tolerance}, {"note", c.note}, {"seconds", c.seconds}});
  return {{"criteria", j}, {"all_passed", all_passed()}};
}

std::string AcceptanceReport::to_text() const
{
  std::ostringstream os;
  for (const auto& c : criteria)
  {
    os << (c.passed ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << c.measured
       << " [tolerance " << c.tolerance << "]";
    if (!c.note.empty())
      os << " {" << c.note << "}";
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.1fs", c.seconds);
    os << buf << "\n";
  }
  return os.str();
}

AcceptanceReport acceptance_suite(const AcceptanceOptions& opt)
{
  AcceptanceReport rep;
  Desk desk(opt);
  const std::vector<std::pair<int, std::function<CriterionResult()>>> all = {
    {1, [&] { return free_propagator(opt); }},
    {2, [&] { return splitting_order(opt); }},
    {3, [&] { return exact_substep(opt); }},
    {4, [&] { return mass_ledger(opt, desk); }},
    {5, [&] { return magnitude_identity(desk); }},
    {6, [&] { return equivalence(opt); }},
    {7, [&] { return sup_limit(desk); }},
    {8, [&] { return l2_rate(desk); }},
    {9, [&] { return profile_error_law(desk); }},
    {10, [&] { return algebra(opt, desk); }},
    {11, [&] { return schedule(opt); }},
    {12, [&] { return determinism(opt); }},
  };
  static const char* names[] = {"",
                                "free propagator vs Gaussian closed form",
                                "Strang splitting order (Richardson)",
                                "exact nonlinear substep vs scalar ODE integrator",
                                "mass-dissipation ledger",
                                "magnitude identity on the inner half-domain",
                                "pseudo-conformal equivalence of u and v simulations",
                                "sup-norm limit",
                                "L2 decay rate",
                                "profile error law",
                                "profile algebra invariants",
                                "sigma schedule and thresholds",
                                "determinism of row files"};
  for (const auto& [id, fn] : all)
  {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult res;
    try
    {
      res = fn();
    }
    catch (const std::exception& e)
    {
      res.id = id;
      res.name = names[id];
      res.passed = false;
      res.measured = std::string("not evaluated: ") + e.what();
      res.tolerance = "-";
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.criteria.push_back(res);
  }
  return rep;
}

} // namespace pcnls
