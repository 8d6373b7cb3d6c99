#include "pcnls/integrator.hpp"

#include "pcnls/error.hpp"
#include "pcnls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pcnls
{

namespace
{

bool is_nonautonomous(const StepPlan& plan, const ModelParams& p)
{
  return plan.equation == Equation::nonautonomous && p.b > 0.0;
}

} // namespace

void validate_plan(const StepPlan& plan, const ModelParams& p)
{
  if (!(plan.dt > 0.0))
    throw Error("StepPlan: dt must be positive");
  if (!(plan.t_start >= 0.0))
    throw Error("StepPlan: t_start must be non-negative");
  if (!(plan.t_end > plan.t_start))
    throw Error("StepPlan: t_end must exceed t_start");
  if (!(plan.modulus_floor >= 0.0))
    throw Error("StepPlan: modulus_floor must be non-negative");
  if (plan.snapshot_stride < 1)
    throw Error("StepPlan: snapshot_stride must be >= 1");
  if (plan.adapt && !(plan.adapt_c > 0.0 && plan.adapt_c <= 0.1))
    throw Error("StepPlan: adapt_c must lie in (0, 0.1]");
  if (is_nonautonomous(plan, p) && !(p.b * plan.t_end < 1.0))
    throw Error("StepPlan: nonautonomous runs require t_end < 1/b");
  for (double tl : plan.landmarks)
    if (!(tl > plan.t_start && tl <= plan.t_end))
      throw Error("StepPlan: landmarks must lie in (t_start, t_end]");
}

double time_at_distance(double b, double distance)
{
  if (!(b > 0.0))
    throw Error("time_at_distance: b must be positive");
  return (1.0 - distance) / b;
}

double planned_step(const StepPlan& plan, const ModelParams& p, double t)
{
  double h = plan.dt;
  if (plan.adapt && is_nonautonomous(plan, p))
    h = std::min(h, plan.adapt_c * (1.0 - p.b * t) * std::min(1.0, 1.0 / p.b));
  return h;
}

double nonlinear_weight(double t, const ModelParams& p)
{
  if (p.b == 0.0)
    return 1.0;
  return std::pow(1.0 - p.b * t, -(1.0 + p.nu()));
}

cplx nonlinear_flow(cplx z0, double tau, const ModelParams& p)
{
  if (p.lambda_re > 0.0)
    throw Error("nonlinear_flow: Re lambda > 0 is not supported");
  if (tau == 0.0 || z0 == cplx(0.0))
    return z0;
  const double a = std::pow(std::abs(z0), p.alpha);
  if (p.lambda_re < 0.0)
  {
    const double q = -p.alpha * p.lambda_re * a * tau;
    const double lq = std::log1p(q);
    const double factor = std::exp(-lq / p.alpha);
    if (p.lambda_im == 0.0)
      return z0 * factor;
    const double phase = -(p.lambda_im / (p.alpha * p.lambda_re)) * lq;
    return z0 * std::polar(factor, phase);
  }
  return z0 * std::polar(1.0, p.lambda_im * a * tau);
}

double nonlinear_flow_dissipation(cplx z0, double tau, const ModelParams& p)
{
  const double mod2 = std::norm(z0);
  if (tau == 0.0 || mod2 == 0.0)
    return 0.0;
  const double a = std::pow(std::abs(z0), p.alpha);
  if (p.lambda_re < 0.0)
  {
    const double q = -p.alpha * p.lambda_re * a * tau;
    return mod2 * -std::expm1(-(2.0 / p.alpha) * std::log1p(q)) / (2.0 * -p.lambda_re);
  }
  return a * mod2 * tau;
}

Field nonlinear_substep(const Field& f, double tau, const ModelParams& p)
{
  if (tau < 0.0)
    throw Error("nonlinear_substep: tau must be >= 0");
  Field out = f;
  for (auto& z : out.values)
    z = nonlinear_flow(z, tau, p);
  return out;
}

double effective_tau(double t, double dt, const ModelParams& p)
{
  if (p.b == 0.0)
    return dt;
  const double r0 = 1.0 - p.b * t;
  const double r1 = 1.0 - p.b * (t + dt);
  if (!(r1 > 0.0) || !(r0 > 0.0))
    throw Error("effective_tau: interval reaches t = 1/b");
  if (dt == 0.0)
    return 0.0;
  const double lratio = std::log1p(-p.b * dt / r0);
  const double nu = p.nu();
  if (nu == 0.0)
    return -lratio / p.b;
  return std::pow(r0, -nu) * std::expm1(-nu * lratio) / (p.b * nu);
}

double effective_tau_between(double r0, double r1, const ModelParams& p)
{
  if (!(p.b > 0.0))
    throw Error("effective_tau_between: b must be positive");
  if (!(r1 > 0.0) || !(r0 >= r1))
    throw Error("effective_tau_between: need r0 >= r1 > 0");
  const double lratio = std::log(r1 / r0);
  const double nu = p.nu();
  if (nu == 0.0)
    return -lratio / p.b;
  return std::pow(r0, -nu) * std::expm1(-nu * lratio) / (p.b * nu);
}

Field strang_step(const Field& f, double t, double dt, const StepPlan& plan, const ModelParams& p)
{
  const double tau = is_nonautonomous(plan, p) ? effective_tau(t, dt, p) : dt;
  Field out = free_propagate(f, 0.5 * dt);
  out = nonlinear_substep(out, tau, p);
  out = free_propagate(out, 0.5 * dt);
  out.time = t + dt;
  return out;
}

double Trajectory::distance(std::size_t i) const
{
  return 1.0 - params.b * snapshots.at(i).time;
}

std::vector<double> Trajectory::v0_mag_alpha() const
{
  std::vector<double> out(initial.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::pow(std::abs(initial.values[i]), params.alpha);
  return out;
}

std::vector<double> Trajectory::f_field(std::size_t i) const
{
  const auto& integral = f_integral.at(i);
  const auto v0a = v0_mag_alpha();
  std::vector<double> out(integral.size());
  for (std::size_t q = 0; q < out.size(); ++q)
    out[q] = -params.alpha * v0a[q] * integral[q];
  return out;
}

double Trajectory::mass_ledger_residual(std::size_t i) const
{
  const double m0 = std::pow(l2_norm(initial), 2);
  const double mt = std::pow(l2_norm(snapshots.at(i)), 2);
  return std::abs(mt + 2.0 * std::abs(params.lambda_re) * dissipation.at(i) - m0) / m0;
}

Trajectory run(const Field& v0, const StepPlan& plan, const ModelParams& p, bool theorem_mode,
               int weight_power_n, const SnapshotObserver& observer)
{
  validate_plan(plan, p);
  if (auto rep = validate_params(p, theorem_mode); !rep.ok())
    throw Error("run: " + rep.violations.front());
  if (!v0.all_finite())
    throw Error("run: initial data contain non-finite samples");
  if (theorem_mode)
  {
    double inf_w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v0.size(); ++i)
      inf_w = std::min(inf_w, std::pow(japanese(v0.grid, i), weight_power_n) * std::abs(v0.values[i]));
    if (!(inf_w > 0.0))
      throw Error("run: initial data violate inf <x>^n |v0| > 0");
  }

  const Grid& g = v0.grid;
  const std::size_t size = g.size();
  const double cell = g.cell_volume();
  const bool nonauto = is_nonautonomous(plan, p);
  const auto k2 = xi_squared(g);
  std::vector<bool> inner(size);
  for (std::size_t i = 0; i < size; ++i)
    inner[i] = in_inner_box(g, i, 0.5);

  Trajectory traj;
  traj.params = p;
  traj.plan = plan;
  traj.initial = v0;
  traj.initial.time = plan.t_start;

  std::vector<cplx> v = v0.values;
  std::vector<cplx> vhat = v;
  fft_forward(g, vhat);
  std::vector<cplx> work(size);

  auto laplacian_of = [&](const std::vector<cplx>& spectrum) {
    for (std::size_t i = 0; i < size; ++i)
      work[i] = -k2[i] * spectrum[i];
    fft_inverse(g, work);
  };

  // |v|^{-alpha-1} L = -Im(conj(v) Lap v) |v|^{-alpha-2}
  auto f_integrand = [&](std::vector<double>& out) {
    laplacian_of(vhat);
    for (std::size_t i = 0; i < size; ++i)
    {
      const double mod = std::abs(v[i]);
      out[i] = mod > 0.0 ? -std::imag(std::conj(v[i]) * work[i]) * std::pow(mod, -p.alpha - 2.0) : 0.0;
    }
  };

  auto dissipation_density = [&]() {
    double s = 0.0;
    for (const auto& z : v)
      s += std::pow(std::abs(z), p.alpha + 2.0);
    return s * cell;
  };

  std::vector<double> g_prev(size), g_next(size), f_int(size, 0.0);
  const bool diag = plan.diagnostics;
  if (diag)
    f_integrand(g_prev);
  double t = plan.t_start;
  double diss = 0.0;
  double diss_trap = 0.0;
  double d_prev = diag ? dissipation_density() * (nonauto ? nonlinear_weight(t, p) : 1.0) : 0.0;

  auto store = [&]() {
    traj.snapshots.emplace_back(g, v, t);
    if (observer)
      observer(traj.snapshots.back(), traj.snapshots.size() - 1);
    traj.f_integral.push_back(f_int);
    traj.dissipation.push_back(diss);
    traj.dissipation_trapezoid.push_back(diss_trap);
  };
  store();

  std::vector<double> landmarks = plan.landmarks;
  std::sort(landmarks.begin(), landmarks.end());
  std::size_t next_landmark = 0;

  std::vector<cplx> half(size);
  double half_for = -1.0;
  std::size_t step = 0;
  while (t < plan.t_end)
  {
    while (next_landmark < landmarks.size() && landmarks[next_landmark] <= t)
      ++next_landmark;
    const double target = next_landmark < landmarks.size() ? landmarks[next_landmark] : plan.t_end;
    double h = planned_step(plan, p, t);
    bool landed = false;
    if (t + h >= target)
    {
      h = target - t;
      landed = true;
    }
    if (!(h > 0.0))
      break;

    if (h != half_for)
    {
      for (std::size_t i = 0; i < size; ++i)
        half[i] = std::polar(1.0, -0.5 * k2[i] * h);
      half_for = h;
    }
    const double tau = nonauto ? effective_tau(t, h, p) : h;

    for (std::size_t i = 0; i < size; ++i)
      vhat[i] *= half[i];
    v = vhat;
    fft_inverse(g, v);
    double step_diss = 0.0;
    for (auto& z : v)
    {
      if (diag)
        step_diss += nonlinear_flow_dissipation(z, tau, p);
      z = nonlinear_flow(z, tau, p);
    }
    diss += step_diss * cell;
    vhat = v;
    fft_forward(g, vhat);
    for (std::size_t i = 0; i < size; ++i)
      vhat[i] *= half[i];
    v = vhat;
    fft_inverse(g, v);

    t = landed ? target : t + h;
    ++step;
    traj.step_sizes.push_back(h);

    double min_inner = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size; ++i)
    {
      if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
        throw SimulationAborted("run: non-finite sample", t);
      if (inner[i])
        min_inner = std::min(min_inner, std::abs(v[i]));
    }
    if (min_inner < plan.modulus_floor)
    {
      std::ostringstream os;
      os << "run: min |v| on the inner half-domain fell to " << min_inner;
      throw SimulationAborted(os.str(), t);
    }

    if (diag)
    {
      f_integrand(g_next);
      for (std::size_t i = 0; i < size; ++i)
        f_int[i] += 0.5 * h * (g_prev[i] + g_next[i]);
      g_prev.swap(g_next);

      const double d_next = dissipation_density() * (nonauto ? nonlinear_weight(t, p) : 1.0);
      diss_trap += 0.5 * h * (d_prev + d_next);
      d_prev = d_next;
    }

    const bool final_step = t >= plan.t_end;
    const bool at_landmark = landed && target != plan.t_end;
    if (final_step || at_landmark || step % static_cast<std::size_t>(plan.snapshot_stride) == 0)
      store();
  }
  traj.steps_taken = step;
  return traj;
}

cplx ode_oracle(cplx z0, double t, const ModelParams& p)
{
  return nonlinear_flow(z0, effective_tau(0.0, t, p), p);
}

cplx ode_oracle_at_distance(cplx z0, double r, const ModelParams& p)
{
  return nonlinear_flow(z0, effective_tau_between(1.0, r, p), p);
}

double ode_limit_value(const ModelParams& p)
{
  if (!(p.lambda_re < 0.0))
    throw Error("ode_limit_value: requires Re lambda < 0");
  return p.b * p.nu() / (p.alpha * std::abs(p.lambda_re));
}

double ode_scaled_modulus(cplx z0, double r, const ModelParams& p)
{
  const cplx z = ode_oracle_at_distance(z0, r, p);
  return std::pow(r, -p.nu()) * std::pow(std::abs(z), p.alpha);
}

} // namespace pcnls
