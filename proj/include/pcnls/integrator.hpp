#pragma once

#include "pcnls/domain_core.hpp"
#include "pcnls/grid.hpp"

#include <functional>
#include <vector>

namespace pcnls
{

enum class Equation
{
  autonomous,    // du/dt = i Lap u + lambda |u|^alpha u
  nonautonomous, // dv/dt = i Lap v + lambda (1-bt)^{-(4-N alpha)/2} |v|^alpha v
};

struct StepPlan
{
  Equation equation = Equation::nonautonomous;
  double dt = 1e-3;
  /// Start time (non-zero when resuming from a checkpoint).
  double t_start = 0.0;
  double t_end = 0.0;
  /// Shrink the step as t approaches 1/b: dt <= adapt_c (1 - bt) min(1, 1/b).
  bool adapt = true;
  double adapt_c = 0.05;
  int snapshot_stride = 1;
  /// Times the stepper lands on exactly; a snapshot is stored at each.
  std::vector<double> landmarks;
  /// Abort when min |v| on the inner half-domain drops below this; 0 disables
  /// the check (linear oracles and direct u runs that never use L).
  double modulus_floor = 1e-12;
  /// Accumulate f and the dissipation integrals.  Direct u runs that only
  /// need the field switch this off.
  bool diagnostics = true;
};

/// Throws pcnls::Error when the plan is inconsistent with the parameters.
void validate_plan(const StepPlan& plan, const ModelParams& p);

/// t such that 1 - b t = distance.
double time_at_distance(double b, double distance);

/// Size of the step taken from time t under the plan (before clamping to
/// landmarks and t_end).
double planned_step(const StepPlan& plan, const ModelParams& p, double t);

/// Time weight (1 - bt)^{-(4 - N alpha)/2} of the nonlinearity.
double nonlinear_weight(double t, const ModelParams& p);

/// Exact flow of z' = lambda |z|^alpha z over effective time tau.
cplx nonlinear_flow(cplx z0, double tau, const ModelParams& p);

/// Integral over [0, tau] of |z(s)|^{alpha+2} along nonlinear_flow.
double nonlinear_flow_dissipation(cplx z0, double tau, const ModelParams& p);

/// Pointwise exact nonlinear substep.
Field nonlinear_substep(const Field& f, double tau, const ModelParams& p);

/// Integral of the time weight over [t, t+dt]; dt itself when b = 0.
double effective_tau(double t, double dt, const ModelParams& p);

/// Same integral between two distances r0 = 1 - b t0 > r1 = 1 - b t1 > 0,
/// free of the cancellation in 1 - b t.
double effective_tau_between(double r0, double r1, const ModelParams& p);

/// One linear-nonlinear-linear step.
Field strang_step(const Field& f, double t, double dt, const StepPlan& plan,
                  const ModelParams& p);

struct Trajectory
{
  ModelParams params;
  StepPlan plan;
  Field initial;
  std::vector<Field> snapshots;
  /// Per snapshot: trapezoid quadrature of |v|^{-alpha-1} L over [0, t].
  std::vector<std::vector<double>> f_integral;
  /// Per snapshot: integral of w(s) ||v(s)||_{alpha+2}^{alpha+2} over [0, t],
  /// exact along each nonlinear substep (w = nonlinear time weight).
  std::vector<double> dissipation;
  /// Same integral by the trapezoid rule on step endpoints (diagnostic).
  std::vector<double> dissipation_trapezoid;
  std::vector<double> step_sizes;
  std::size_t steps_taken = 0;

  /// 1 - b t of snapshot i (1 when b = 0).
  double distance(std::size_t i) const;
  /// f(t, x) = -alpha |v0|^alpha * f_integral.
  std::vector<double> f_field(std::size_t i) const;
  std::vector<double> v0_mag_alpha() const;
  /// ||v(t)||^2 + 2 |Re lambda| D(t) - ||v0||^2, relative to ||v0||^2.
  double mass_ledger_residual(std::size_t i) const;
};

/// Called with every stored snapshot and its index.
using SnapshotObserver = std::function<void(const Field&, std::size_t)>;

/// Advances v0 from plan.t_start to plan.t_end.  Aborts with SimulationAborted on non-finite
/// samples or when min |v| on the inner half-domain drops below 1e-12.  In
/// theorem mode the initial data must satisfy inf <x>^n |v0| > 0 on the grid.
Trajectory run(const Field& v0, const StepPlan& plan, const ModelParams& p,
               bool theorem_mode = false, int weight_power_n = 0,
               const SnapshotObserver& observer = {});

/// Closed-form solution of z' = lambda (1-bt)^{-(4-N alpha)/2} |z|^alpha z.
cplx ode_oracle(cplx z0, double t, const ModelParams& p);

/// Same, parametrised by the distance r = 1 - b t.
cplx ode_oracle_at_distance(cplx z0, double r, const ModelParams& p);

/// b (2 - N alpha) / (2 alpha |Re lambda|).
double ode_limit_value(const ModelParams& p);

/// (1 - bt)^{-(2 - N alpha)/2} |z(t)|^alpha at distance r.
double ode_scaled_modulus(cplx z0, double r, const ModelParams& p);

} // namespace pcnls
