#include "pcnls/error.hpp"
#include "pcnls/integrator.hpp"
#include "pcnls/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace pcnls;

namespace
{

ModelParams params(cplx lambda, double alpha, double b, int dim = 1)
{
  ModelParams p;
  p.lambda_re = lambda.real();
  p.lambda_im = lambda.imag();
  p.alpha = alpha;
  p.b = b;
  p.dim = dim;
  return p;
}

// dz/dt = lambda (1 - bt)^{-(4 - N alpha)/2} |z|^alpha z by Runge-Kutta-Fehlberg 7(8)
cplx ode_reference(cplx z0, double t0, double t1, const ModelParams& p)
{
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const cplx lam = p.lambda();
  auto rhs = [&](const State& x, State& dx, double t) {
    const cplx z(x[0], x[1]);
    const double w = p.b == 0.0 ? 1.0 : std::pow(1.0 - p.b * t, -(4.0 - p.dim * p.alpha) / 2.0);
    const cplx dz = lam * w * std::pow(std::abs(z), p.alpha) * z;
    dx = {dz.real(), dz.imag()};
  };
  State x = {z0.real(), z0.imag()};
  if (t1 > t0)
    ode::integrate_adaptive(ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_fehlberg78<State>()), rhs, x, t0,
                            t1, 1e-6);
  return {x[0], x[1]};
}

double weight_integral(double t, double dt, const ModelParams& p)
{
  auto w = [&](double s) { return std::pow(1.0 - p.b * s, -(4.0 - p.dim * p.alpha) / 2.0); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(w, t, t + dt, 15, 1e-14);
}

Field gaussian(const Grid& g)
{
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values[i] = std::exp(-0.5 * g.radius_squared(i));
  return f;
}

Field bracket(const Grid& g, int n)
{
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values[i] = std::pow(japanese(g, i), -n);
  return f;
}

} // namespace

TEST_CASE("exact nonlinear flow")
{
  const cplx a = nonlinear_flow(1.0, 0.5, params(-1.0, 2.0, 0.0));
  CHECK(std::abs(a) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(std::abs(std::arg(a)) < 1e-15);

  const cplx c = nonlinear_flow(1.0, 1.0, params({-1.0, 1.0}, 1.0, 0.0));
  CHECK(std::abs(c - std::polar(0.5, std::log(2.0))) < 1e-14);

  const cplx z0(0.3, -2.0);
  CHECK(nonlinear_flow(z0, 0.0, params({-1.0, 1.0}, 1.3, 0.0)) == z0);
  CHECK(nonlinear_flow(0.0, 2.0, params({-1.0, 1.0}, 1.3, 0.0)) == cplx(0.0));

  // Re lambda = 0 rotates the phase only
  const cplx r = nonlinear_flow(z0, 0.7, params({0.0, -1.0}, 1.5, 0.0));
  CHECK(std::abs(r) == doctest::Approx(std::abs(z0)).epsilon(1e-15));
  CHECK(std::abs(r - z0 * std::polar(1.0, -0.7 * std::pow(std::abs(z0), 1.5))) < 1e-14);
}

TEST_CASE("property: exact flow agrees with a Runge-Kutta oracle and composes")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial)
  {
    const ModelParams p = params({-2.0 * u(rng), 4.0 * u(rng) - 2.0}, 0.2 + 1.8 * u(rng), 0.0);
    const cplx z0 = std::polar(0.05 + 4.0 * u(rng), 6.0 * u(rng));
    const double tau = 3.0 * u(rng);
    const cplx z = nonlinear_flow(z0, tau, p);
    CHECK(std::abs(z - ode_reference(z0, 0.0, tau, p)) < 1e-10 * std::max(1.0, std::abs(z0)));
    CHECK(std::abs(nonlinear_flow(nonlinear_flow(z0, 0.4 * tau, p), 0.6 * tau, p) - z) < 1e-12 * std::abs(z0));
    CHECK(std::abs(z) <= std::abs(z0) * (1.0 + 1e-15));
  }
}

TEST_CASE("effective step of the nonautonomous weight")
{
  const ModelParams aut = params(-1.0, 1.0, 0.0);
  CHECK(effective_tau(0.3, 0.01, aut) == 0.01);

  const ModelParams p = params(-1.0, 1.0, 1.0);
  CHECK(effective_tau(0.0, 0.5, p) == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-14));

  const ModelParams q = params(-1.0, 1.8, 4.0);
  for (double t : {0.0, 0.1, 0.2, 0.249})
    for (double dt : {1e-6, 1e-4, 1e-3})
    {
      if (1.0 - q.b * (t + dt) <= 0.0)
        continue;
      CHECK(effective_tau(t, dt, q) == doctest::Approx(weight_integral(t, dt, q)).epsilon(1e-12));
    }
  // small steps approach dt times the weight
  const double ratio = effective_tau(0.2, 1e-9, q) / (1e-9 * nonlinear_weight(0.2, q));
  CHECK(ratio == doctest::Approx(1.0).epsilon(1e-8));

  // additivity
  CHECK(effective_tau(0.1, 0.05, q) ==
        doctest::Approx(effective_tau(0.1, 0.02, q) + effective_tau(0.12, 0.03, q)).epsilon(1e-13));
  CHECK(effective_tau_between(1.0, 0.5, p) == doctest::Approx(effective_tau(0.0, 0.5, p)).epsilon(1e-14));
  CHECK_THROWS_AS(effective_tau(0.2, 0.06, q), Error);
}

TEST_CASE("time at a given distance")
{
  CHECK(time_at_distance(4.0, 1e-3) == doctest::Approx(0.999 / 4.0).epsilon(1e-14));
  CHECK(1.0 - 4.0 * time_at_distance(4.0, 1e-2) == doctest::Approx(1e-2).epsilon(1e-12));
}

TEST_CASE("Strang step special cases")
{
  const Grid g(1, 20.0, 256);
  const Field v = bracket(g, 2);
  StepPlan plan;
  plan.equation = Equation::autonomous;

  const ModelParams free = params(0.0, 1.0, 0.0);
  CHECK(max_abs_diff(strang_step(v, 0.0, 0.01, plan, free), free_propagate(v, 0.01)) < 1e-14);

  Field c(g);
  for (auto& x : c.values)
    x = cplx(0.8, 0.3);
  const ModelParams p = params({-1.0, 0.5}, 1.2, 0.0);
  const Field s = strang_step(c, 0.0, 0.1, plan, p);
  const cplx exact = nonlinear_flow(cplx(0.8, 0.3), 0.1, p);
  for (const auto& x : s.values)
    CHECK(std::abs(x - exact) < 1e-14);
}

TEST_CASE("Strang splitting is second order on Gaussian data")
{
  const Grid g(1, 20.0, 512);
  const ModelParams p = params(-1.0, 1.0, 0.0);
  auto solve = [&](double dt) {
    StepPlan plan;
    plan.equation = Equation::autonomous;
    plan.dt = dt;
    plan.adapt = false;
    plan.t_end = 0.5;
    plan.modulus_floor = 0.0;
    plan.snapshot_stride = 1 << 30;
    return run(gaussian(g), plan, p).snapshots.back();
  };
  std::vector<double> err;
  for (double dt : {1e-2, 5e-3, 2.5e-3})
    err.push_back(max_abs_diff(solve(dt), solve(dt / 2.0)));
  for (int i = 0; i + 1 < 3; ++i)
  {
    const double ratio = err[i] / err[i + 1];
    CHECK(ratio > 4.0 / 1.5);
    CHECK(ratio < 4.0 * 1.5);
  }
}

TEST_CASE("mass ledger")
{
  const Grid g(1, 20.0, 1024);
  StepPlan plan;
  plan.equation = Equation::autonomous;
  plan.dt = 1e-3;
  plan.adapt = false;
  plan.t_end = 1.0;
  plan.snapshot_stride = 25;

  const Trajectory cons = run(bracket(g, 2), plan, params({0.0, -1.0}, 1.0, 0.0));
  const double m0 = l2_norm(cons.initial);
  for (const auto& s : cons.snapshots)
    CHECK(std::abs(l2_norm(s) - m0) / m0 < 1e-8);

  const Trajectory diss = run(bracket(g, 2), plan, params(-1.0, 1.0, 0.0));
  for (std::size_t i = 0; i < diss.snapshots.size(); ++i)
    CHECK(diss.mass_ledger_residual(i) < 1e-6);
  CHECK(l2_norm(diss.snapshots.back()) < m0);
}

TEST_CASE("adaptive steps shrink towards the singular time")
{
  const Grid g(1, 20.0, 256);
  const ModelParams p = params(-1.0, 1.8, 4.0);
  StepPlan plan;
  plan.dt = 1e-3;
  plan.t_end = time_at_distance(4.0, 1e-2);
  plan.snapshot_stride = 50;
  const Trajectory tr = run(bracket(g, 2), plan, p);
  CHECK(tr.distance(tr.snapshots.size() - 1) == doctest::Approx(1e-2).epsilon(1e-9));
  const auto& h = tr.step_sizes;
  REQUIRE(h.size() > 10);
  // once the distance rule is active the steps never grow (the last one may be clipped)
  std::size_t first = 0;
  while (first < h.size() && h[first] == h[0])
    ++first;
  for (std::size_t i = first; i + 2 < h.size(); ++i)
    CHECK(h[i + 1] <= h[i] * (1.0 + 1e-12));
}

TEST_CASE("plan validation")
{
  const ModelParams p = params(-1.0, 1.8, 4.0);
  StepPlan plan;
  plan.t_end = 0.25;
  CHECK_THROWS_AS(validate_plan(plan, p), Error);
  plan.t_end = 0.2;
  plan.dt = -1.0;
  CHECK_THROWS_AS(validate_plan(plan, p), Error);
  plan.dt = 1e-3;
  plan.landmarks = {0.3};
  CHECK_THROWS_AS(validate_plan(plan, p), Error);
  plan.landmarks = {0.1};
  CHECK_NOTHROW(validate_plan(plan, p));
}

TEST_CASE("landmarks are hit exactly and runs are deterministic")
{
  const Grid g(1, 20.0, 256);
  const ModelParams p = params({-1.0, 0.3}, 1.8, 4.0);
  StepPlan plan;
  plan.dt = 1e-3;
  plan.t_end = time_at_distance(4.0, 1e-2);
  plan.landmarks = {time_at_distance(4.0, 0.5), time_at_distance(4.0, 0.1)};
  plan.snapshot_stride = 1000;
  const Trajectory a = run(bracket(g, 2), plan, p);
  const Trajectory b = run(bracket(g, 2), plan, p);
  int hits = 0;
  for (const auto& s : a.snapshots)
    for (double l : plan.landmarks)
      hits += s.time == l;
  CHECK(hits == 2);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i)
    CHECK(a.snapshots[i].values == b.snapshots[i].values);
}

TEST_CASE("scalar ODE oracle")
{
  const ModelParams p = params({-1.0, 0.4}, 1.8, 1.0);
  const cplx z0(0.6, 0.2);
  CHECK(ode_oracle(z0, 0.0, p) == z0);
  for (double t : {0.1, 0.5, 0.9, 0.99})
    CHECK(std::abs(ode_oracle(z0, t, p) - ode_reference(z0, 0.0, t, p)) < 1e-9);
  CHECK(std::abs(ode_oracle_at_distance(z0, 0.25, p) - ode_oracle(z0, 0.75, p)) < 1e-14);

  const ModelParams q = params(-1.0, 1.8, 1.0);
  CHECK(ode_limit_value(q) == doctest::Approx(0.2 / 3.6).epsilon(1e-14));
  // the scaled modulus approaches the same limit for any start value, with
  // the gap between starts shrinking as the singular time is approached
  double prev_gap = 1e300;
  for (double r : {1e-4, 1e-8, 1e-12, 1e-16})
  {
    const double a = ode_scaled_modulus(1.0, r, q);
    const double b = ode_scaled_modulus(std::polar(5.0, 1.0), r, q);
    const double gap = std::abs(a - b);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(std::abs(ode_scaled_modulus(1.0, 1e-40, q) - ode_limit_value(q)) / ode_limit_value(q) < 0.05);
}
