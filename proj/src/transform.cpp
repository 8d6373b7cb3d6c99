#include "pcnls/transform.hpp"

#include "pcnls/error.hpp"
#include "pcnls/spectral.hpp"

#include <cmath>

namespace pcnls
{

TransformPair TransformPair::from_u_time(double t, double b)
{
  if (b < 0.0)
    throw Error("transform: b must be non-negative");
  if (t < 0.0)
    throw Error("transform: negative time");
  TransformPair tp;
  tp.b = b;
  tp.u_time = t;
  tp.v_time = t / (1.0 + b * t);
  tp.scale = 1.0 / (1.0 + b * t);
  return tp;
}

TransformPair TransformPair::from_v_time(double s, double b)
{
  if (b < 0.0)
    throw Error("transform: b must be non-negative");
  if (s < 0.0)
    throw Error("transform: negative time");
  if (b > 0.0 && !(b * s < 1.0))
    throw Error("transform: s must stay below 1/b");
  TransformPair tp;
  tp.b = b;
  tp.v_time = s;
  tp.scale = 1.0 - b * s;
  tp.u_time = s / (1.0 - b * s);
  return tp;
}

double chirp_resolution(const Grid& g, double b, double t)
{
  return b * g.half_width() * g.spacing() / (2.0 * (1.0 + b * t));
}

namespace
{

void check_chirp(const Grid& g, double b, double t)
{
  if (chirp_resolution(g, b, t) > kChirpLimit * (1.0 + 1e-12))
    throw Error("transform: quadratic phase under-resolved on the grid (need b L h / (2(1+bt)) <= pi/4)");
}

// multiplies by e^{i sign b |x|^2 / (4(1+bt))}
void apply_chirp(Field& f, double b, double t, double sign)
{
  const double c = sign * b / (4.0 * (1.0 + b * t));
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] *= std::polar(1.0, c * f.grid.radius_squared(i));
}

} // namespace

Field v_to_u(const Field& v, const ModelParams& p, const Grid& target)
{
  if (p.b == 0.0)
  {
    Field u = resample(v, 1.0, target);
    return u;
  }
  const TransformPair tp = TransformPair::from_v_time(v.time, p.b);
  check_chirp(target, p.b, tp.u_time);
  Field u = resample(v, tp.scale, target);
  u.time = tp.u_time;
  const double amp = std::pow(tp.scale, 0.5 * p.dim);
  for (auto& z : u.values)
    z *= amp;
  apply_chirp(u, p.b, tp.u_time, 1.0);
  return u;
}

Field u_to_v(const Field& u, const ModelParams& p, const Grid& target)
{
  if (p.b == 0.0)
    return resample(u, 1.0, target);
  const TransformPair tp = TransformPair::from_u_time(u.time, p.b);
  check_chirp(u.grid, p.b, tp.u_time);
  Field smooth = u;
  apply_chirp(smooth, p.b, tp.u_time, -1.0);
  Field v = resample(smooth, 1.0 / tp.scale, target);
  v.time = tp.v_time;
  const double amp = std::pow(tp.scale, -0.5 * p.dim);
  for (auto& z : v.values)
    z *= amp;
  return v;
}

namespace
{

// restriction of f to the centred subgrid `inner` (same spacing)
Field restrict_to(const Field& f, const Grid& inner)
{
  const Grid& g = f.grid;
  const int offset = (g.points() - inner.points()) / 2;
  Field out(inner, f.time);
  for (std::size_t i = 0; i < inner.size(); ++i)
  {
    const auto a = inner.unflatten(i);
    std::size_t flat = 0;
    for (int d = 0; d < g.dim(); ++d)
      flat = flat * static_cast<std::size_t>(g.points()) + static_cast<std::size_t>(a[d] + offset);
    out.values[i] = f.values[flat];
  }
  return out;
}

} // namespace

std::vector<EquivalencePoint> equivalence_test(const std::function<Field(const Grid&)>& initial,
                                               const ModelParams& p, const std::vector<double>& times,
                                               const EquivalenceOptions& opt)
{
  if (times.empty())
    return {};
  if (p.b < 0.0)
    throw Error("equivalence_test: b must be non-negative");
  const Grid& gu = opt.u_grid;
  if (!(opt.compare_fraction > 0.0 && opt.compare_fraction <= 1.0))
    throw Error("equivalence_test: compare_fraction must lie in (0, 1]");

  // centred subgrid of the u grid inside both the requested fraction and the
  // image of the reliable part of the v grid at time t
  auto compare_grid = [&](double t) {
    const double reach =
      std::min(opt.compare_fraction * gu.half_width(), 0.9 * opt.v_grid.half_width() * (1.0 + p.b * t));
    int pts = gu.points();
    while (pts >= 32 && 0.5 * pts * gu.spacing() > reach * (1.0 + 1e-12))
      pts /= 2;
    if (0.5 * pts * gu.spacing() > reach * (1.0 + 1e-12))
      throw Error("equivalence_test: v grid too small for the comparison region");
    return Grid(gu.dim(), 0.5 * pts * gu.spacing(), pts);
  };

  std::vector<double> t_marks, s_marks;
  double t_max = 0.0;
  for (double t : times)
  {
    if (t < 0.0)
      throw Error("equivalence_test: negative time");
    t_max = std::max(t_max, t);
    if (t > 0.0)
    {
      t_marks.push_back(t);
      s_marks.push_back(TransformPair::from_u_time(t, p.b).v_time);
    }
  }

  Field v0 = initial(opt.v_grid);
  Field u0 = initial(gu);
  if (chirp_resolution(gu, p.b, 0.0) > 2.0 * kChirpLimit)
    throw Error("equivalence_test: u grid cannot carry the initial quadratic phase");
  apply_chirp(u0, p.b, 0.0, 1.0);

  std::vector<EquivalencePoint> out;
  if (t_max == 0.0)
  {
    for (double t : times)
    {
      (void)t;
      const Grid inner = compare_grid(0.0);
      out.push_back({0.0, 0.0, max_abs_diff(v_to_u(v0, p, inner), restrict_to(u0, inner))});
    }
    return out;
  }

  StepPlan vplan;
  vplan.equation = Equation::nonautonomous;
  vplan.dt = opt.v_dt;
  vplan.t_end = TransformPair::from_u_time(t_max, p.b).v_time;
  vplan.adapt = p.b > 0.0;
  vplan.snapshot_stride = 1 << 30;
  vplan.landmarks = s_marks;
  vplan.modulus_floor = opt.v_modulus_floor;
  const Trajectory vt = run(v0, vplan, p);

  ModelParams pu = p;
  StepPlan uplan;
  uplan.equation = Equation::autonomous;
  uplan.dt = opt.u_dt;
  uplan.t_end = t_max;
  uplan.adapt = false;
  uplan.snapshot_stride = 1 << 30;
  uplan.landmarks = t_marks;
  uplan.modulus_floor = 0.0;
  uplan.diagnostics = false;
  const Trajectory ut = run(u0, uplan, pu);

  auto find = [](const Trajectory& tr, double time) -> const Field& {
    for (const auto& s : tr.snapshots)
      if (std::abs(s.time - time) <= 1e-12 * std::max(1.0, time))
        return s;
    throw Error("equivalence_test: no snapshot at a matched time");
  };

  for (double t : times)
  {
    EquivalencePoint pt;
    pt.t = t;
    const Field& v = t > 0.0 ? find(vt, TransformPair::from_u_time(t, p.b).v_time) : vt.snapshots.front();
    const Field& u = t > 0.0 ? find(ut, t) : ut.snapshots.front();
    pt.s = v.time;
    const Grid inner = compare_grid(t);
    const Field mapped = v_to_u(v, p, inner);
    pt.discrepancy = max_abs_diff(mapped, restrict_to(u, inner));
    out.push_back(pt);
  }
  return out;
}

std::vector<EquivalencePoint> equivalence_test(const Field& v0, const ModelParams& p,
                                               const std::vector<double>& times, double dt)
{
  EquivalenceOptions opt;
  opt.v_grid = v0.grid;
  opt.u_grid = v0.grid;
  opt.v_dt = dt;
  opt.u_dt = dt;
  // the comparison does not need |v| bounded below
  opt.v_modulus_floor = 0.0;
  const Field copy = v0;
  return equivalence_test([&](const Grid& g) {
    if (!(g == copy.grid))
      throw Error("equivalence_test: initial data only available on its own grid");
    return copy;
  }, p, times, opt);
}

} // namespace pcnls
