#include "pcnls/error.hpp"
#include "pcnls/spectral.hpp"
#include "pcnls/transform.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pcnls;

namespace
{

ModelParams params(cplx lambda, double b)
{
  ModelParams p;
  p.lambda_re = lambda.real();
  p.lambda_im = lambda.imag();
  p.b = b;
  return p;
}

// free evolution of e^{-a x^2} at time t: (1 + 4iat)^{-1/2} e^{-a x^2 / (1 + 4iat)}
cplx free_gaussian(cplx a, double t, double x)
{
  const cplx d = 1.0 + cplx(0.0, 4.0) * a * t;
  return std::pow(d, -0.5) * std::exp(-a * x * x / d);
}

Field sample(const Grid& g, cplx a, double t)
{
  Field f(g, t);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values[i] = free_gaussian(a, t, g.position(i)[0]);
  return f;
}

} // namespace

TEST_CASE("matched times")
{
  const TransformPair a = TransformPair::from_u_time(1.0, 4.0);
  CHECK(a.v_time == doctest::Approx(0.2));
  CHECK(a.scale == doctest::Approx(0.2));
  const TransformPair b = TransformPair::from_v_time(0.2, 4.0);
  CHECK(b.u_time == doctest::Approx(1.0));
  CHECK_THROWS_AS(TransformPair::from_v_time(0.25, 4.0), Error);
  CHECK_THROWS_AS(TransformPair::from_v_time(0.3, 4.0), Error);
}

TEST_CASE("t = 0 applies the chirp only")
{
  const Grid g(1, 20.0, 1024);
  const ModelParams p = params(-1.0, 1.0);
  const Field v0 = sample(g, 0.5, 0.0);
  const Field u0 = v_to_u(v0, p, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(u0.values[i] - std::polar(1.0, g.radius_squared(i) / 4.0) * v0.values[i]) < 1e-15);
  CHECK(max_abs_diff(u_to_v(u0, p, g), v0) < 1e-15);
}

TEST_CASE("b = 0 is the identity")
{
  const Grid g(1, 20.0, 512);
  const ModelParams p = params(-1.0, 0.0);
  const Field v = sample(g, cplx(0.5, 0.2), 0.3);
  CHECK(max_abs_diff(v_to_u(v, p, g), v) == 0.0);
  CHECK(max_abs_diff(u_to_v(v, p, g), v) == 0.0);
}

TEST_CASE("free evolution: both sides in closed form")
{
  // v0 = e^{-x^2/2}; u0 = e^{i x^2/4} v0 = e^{-a x^2} with a = 1/2 - i/4 (b = 1)
  const Grid g(1, 20.0, 1024);
  const ModelParams p = params(0.0, 1.0);
  const cplx a(0.5, -0.25);
  for (double t : {0.25, 1.0})
  {
    const double s = t / (1.0 + t);
    const Field v = sample(g, 0.5, s);
    const Field u = v_to_u(v, p, g);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      e = std::max(e, std::abs(u.values[i] - free_gaussian(a, t, g.position(i)[0])));
    CHECK(e < 1e-7);
  }
  const auto pts = equivalence_test(sample(g, 0.5, 0.0), p, {0.0, 1.0}, 0.05);
  CHECK(pts[0].discrepancy == 0.0);
  CHECK(pts[1].discrepancy < 1e-7);
}

TEST_CASE("round trip")
{
  const ModelParams p = params(-1.0, 1.0);
  const double s = 0.2;
  const Grid vg(1, 20.0, 1024);
  const Field v = sample(vg, cplx(0.5, 0.1), s);
  const Field u = v_to_u(v, p, vg);
  CHECK(u.time == doctest::Approx(0.25));
  const Grid back(1, 10.0, 512);
  const Field w = u_to_v(u, p, back);
  CHECK(w.time == doctest::Approx(s).epsilon(1e-14));
  double e = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i)
    e = std::max(e, std::abs(w.values[i] - v.values[i + 256]));
  CHECK(e < 1e-9);
}

TEST_CASE("property: isometry and modulus relation")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid vg(1, 16.0, 1024);
  for (int trial = 0; trial < 12; ++trial)
  {
    const double b = 0.5 + u(rng);
    const double s = 0.4 / b * u(rng);
    const ModelParams p = params({-1.0, u(rng)}, b);
    const cplx a(0.5 + u(rng), u(rng) - 0.5);
    Field v(vg, s);
    for (std::size_t i = 0; i < vg.size(); ++i)
      v.values[i] = std::exp(-a * vg.radius_squared(i));

    // target chosen so that its nodes map onto nodes of the source
    const double grow = 1.0 / (1.0 - b * s);
    const Grid ug(1, grow * 8.0, 512);
    if (chirp_resolution(ug, b, s * grow) > kChirpLimit)
      continue;
    const Field w = v_to_u(v, p, ug);
    CHECK(l2_norm(w) == doctest::Approx(l2_norm(v)).epsilon(1e-10));
    for (std::size_t i = 0; i < ug.size(); ++i)
    {
      const double expect = std::abs(v.values[i + 256]) / std::sqrt(grow);
      CHECK(std::abs(std::abs(w.values[i]) - expect) <= 1e-12 + 1e-9 * expect);
    }
  }
}

TEST_CASE("dilations near the singular time are refused")
{
  const ModelParams p = params(-1.0, 1.0);
  const Grid g(1, 20.0, 1024);
  // s close to 1/b: the chirp on the target becomes unresolvable
  Field v = sample(g, 0.5, 0.0);
  v.time = 0.999;
  CHECK_THROWS_AS(v_to_u(v, p, Grid(1, 2000.0, 1024)), Error);
  // the preimage of the target leaves the source box
  Field u = sample(g, 0.5, 0.0);
  u.time = 4.0;
  CHECK_THROWS_AS(u_to_v(u, p, g), Error);
}

TEST_CASE("nonlinear equivalence on a Gaussian")
{
  const ModelParams p = params(-1.0, 1.0);
  EquivalenceOptions eo;
  eo.v_grid = Grid(1, 20.0, 1024);
  eo.u_grid = Grid(1, 36.0, 4096);
  eo.v_dt = 1e-3;
  eo.u_dt = 1e-3;
  eo.v_modulus_floor = 0.0;
  const auto pts = equivalence_test(
    [](const Grid& g) {
      Field f(g);
      for (std::size_t i = 0; i < g.size(); ++i)
        f.values[i] = std::exp(-0.5 * g.radius_squared(i));
      return f;
    },
    p, {0.25, 1.0}, eo);
  for (const auto& q : pts)
  {
    CHECK(q.s == doctest::Approx(q.t / (1.0 + q.t)));
    CHECK(q.discrepancy < 1e-6);
  }
}
