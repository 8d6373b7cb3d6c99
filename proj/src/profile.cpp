#include "pcnls/profile.hpp"

#include "pcnls/error.hpp"
#include "pcnls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcnls
{

namespace
{

void require_dissipative(const ModelParams& p, const char* who)
{
  if (!(p.b > 0.0))
    throw Error(std::string(who) + ": requires b > 0");
  if (!(p.lambda_re < 0.0))
    throw Error(std::string(who) + ": requires Re lambda < 0");
}

// alpha |Re lambda| times the integral of the time weight between distances
// r0 and r; equals c [r^{-(2-N alpha)/2} - 1] in the magnitude identity when r0 = 1.
double bracket_coefficient(const ModelParams& p, double r0, double distance)
{
  if (distance >= r0)
    return 0.0;
  return p.alpha * std::abs(p.lambda_re) * effective_tau_between(r0, distance, p);
}

} // namespace

FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw Error("fit_power_law: need at least two paired samples");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error("fit_power_law: samples must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0)
    throw Error("fit_power_law: degenerate abscissae");
  FitResult fit;
  fit.exponent = (dn * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.exponent * sx) / dn;
  fit.prefactor = std::exp(intercept);
  const double mean = sy / dn;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double pred = intercept + fit.exponent * lx[i];
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - mean) * (ly[i] - mean);
  }
  fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.window = {*lo, *hi};
  fit.samples = n;
  return fit;
}

std::vector<double> compute_L(const Field& v)
{
  double min_mod = std::numeric_limits<double>::infinity();
  for (const auto& z : v.values)
    min_mod = std::min(min_mod, std::abs(z));
  if (min_mod < 1e-12)
    throw Error("compute_L: |v| below 1e-12 on the grid");
  const Field lap = laplacian(v);
  std::vector<double> L(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    L[i] = -std::imag(std::conj(v.values[i]) * lap.values[i]) / std::abs(v.values[i]);
  return L;
}

std::vector<double> magnitude_identity_residual(const Trajectory& traj)
{
  const auto& p = traj.params;
  require_dissipative(p, "magnitude_identity_residual");
  const auto v0a = traj.v0_mag_alpha();
  const Grid& g = traj.initial.grid;
  std::vector<double> out;
  out.reserve(traj.snapshots.size());
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s)
  {
    const auto f = traj.f_field(s);
    const double coeff = bracket_coefficient(p, 1.0 - p.b * traj.initial.time, traj.distance(s));
    const auto& v = traj.snapshots[s].values;
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
      if (!in_inner_box(g, i, 0.5) || v0a[i] == 0.0)
        continue;
      const double predicted = v0a[i] / (1.0 + f[i] + coeff * v0a[i]);
      const double actual = std::pow(std::abs(v[i]), p.alpha);
      worst = std::max(worst, std::abs(actual - predicted) / v0a[i]);
    }
    out.push_back(worst);
  }
  return out;
}

double ProfileSet::psi(double distance, std::size_t i) const
{
  const double num = 1.0 + f0[i];
  return std::pow(num / (num + bracket_coefficient(params, initial_distance, distance) * v0_mag_alpha[i]),
                  1.0 / params.alpha);
}

double ProfileSet::theta(double distance, std::size_t i) const
{
  if (params.lambda_im == 0.0)
    return 0.0;
  return params.lambda_im / params.lambda_re * std::log(psi(distance, i));
}

Field ProfileSet::profile_field(double distance) const
{
  Field out(omega0.grid, params.b > 0.0 ? (1.0 - distance) / params.b : 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = omega0.values[i] * std::polar(psi(distance, i), theta(distance, i));
  return out;
}

Field ProfileSet::omega(const Field& v) const
{
  const double r = 1.0 - params.b * v.time;
  Field out = v;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = v.values[i] * std::polar(1.0 / psi(r, i), -theta(r, i));
  return out;
}

ProfileSet build_profiles(const Trajectory& traj, const IndexSet& idx)
{
  const auto& p = traj.params;
  require_dissipative(p, "build_profiles");
  if (traj.snapshots.empty())
    throw Error("build_profiles: empty trajectory");
  const std::size_t last = traj.snapshots.size() - 1;
  if (traj.distance(last) > 1e-2 * (1.0 + 1e-12))
    throw Error("build_profiles: run must reach 1 - bt <= 1e-2");

  ProfileSet prof;
  prof.params = p;
  prof.v0 = traj.initial;
  prof.v0_mag_alpha = traj.v0_mag_alpha();
  prof.f0 = traj.f_field(last);
  prof.final_distance = traj.distance(last);
  prof.initial_distance = 1.0 - p.b * traj.initial.time;
  for (double f : prof.f0)
    if (!(1.0 + f > 0.0))
      throw Error("build_profiles: 1 + f0 <= 0 somewhere");
  prof.omega0 = prof.omega(traj.snapshots[last]);

  const Grid& g = traj.initial.grid;
  for (const auto& snap : traj.snapshots)
  {
    const Field w = prof.omega(snap);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (in_inner_box(g, i, 0.5))
        s = std::max(s, std::pow(japanese(g, i), idx.n) * std::abs(w.values[i] - prof.omega0.values[i]));
    prof.omega_drift.push_back(s);
  }
  return prof;
}

ProfileErrorResult profile_error(const Trajectory& traj, const ProfileSet& prof, const IndexSet& idx,
                                 double r_lo, double r_hi)
{
  ProfileErrorResult res;
  const Grid& g = traj.initial.grid;
  std::vector<double> fx, fy;
  const std::size_t last = traj.snapshots.size() - 1;
  for (std::size_t s = 0; s <= last; ++s)
  {
    const double r = traj.distance(s);
    const Field z = prof.profile_field(r);
    const auto& v = traj.snapshots[s].values;
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (in_inner_box(g, i, 0.5))
        e = std::max(e, std::pow(japanese(g, i), idx.n) * std::abs(v[i] - z.values[i]));
    res.distances.push_back(r);
    res.errors.push_back(e);
    if (s != last && r >= r_lo * (1.0 - 1e-12) && r <= r_hi * (1.0 + 1e-12) && e > 0.0)
    {
      fx.push_back(r);
      fy.push_back(e);
    }
  }
  if (fx.size() >= 2)
    res.fit = fit_power_law(fx, fy);
  return res;
}

SupLimitResult sup_limit_check(const Trajectory& traj)
{
  const auto& p = traj.params;
  require_dissipative(p, "sup_limit_check");
  if (!(p.nu() > 0.0))
    throw Error("sup_limit_check: requires alpha < 2/N");
  SupLimitResult res;
  res.target = ode_limit_value(p);
  const std::size_t last = traj.snapshots.size() - 1;
  const double r_final = traj.distance(last);
  std::vector<double> fx, fy;
  for (std::size_t s = 1; s <= last; ++s)
  {
    const double r = traj.distance(s);
    const double scaled = std::pow(r, -p.nu()) * std::pow(sup_norm(traj.snapshots[s]), p.alpha);
    const double dev = std::abs(scaled - res.target) / res.target;
    res.distances.push_back(r);
    res.deviations.push_back(dev);
    if (r <= 10.0 * r_final * (1.0 + 1e-12) && dev > 0.0)
    {
      fx.push_back(r);
      fy.push_back(dev);
    }
  }
  res.final_deviation = res.deviations.empty() ? 0.0 : res.deviations.back();
  if (fx.size() >= 2)
  {
    res.trend = fit_power_law(fx, fy);
    res.decreasing = res.trend.exponent > 0.0 && fy.back() < fy.front();
  }
  return res;
}

double l2_target_exponent(const ModelParams& p, const IndexSet& idx)
{
  return (1.0 / p.alpha - p.dim / 2.0) * (1.0 - p.dim / (2.0 * idx.n));
}

L2RateResult l2_rate_check(const Trajectory& traj, const ProfileSet& prof, const IndexSet& idx)
{
  const auto& p = traj.params;
  require_dissipative(p, "l2_rate_check");
  L2RateResult res;
  res.target_exponent = l2_target_exponent(p, idx);
  const std::size_t last = traj.snapshots.size() - 1;
  const double r_final = traj.distance(last);
  std::vector<double> rs, solver, profile;
  for (std::size_t s = 0; s <= last; ++s)
  {
    const double r = traj.distance(s);
    if (r > 10.0 * r_final * (1.0 + 1e-12))
      continue;
    rs.push_back(r);
    solver.push_back(l2_norm(traj.snapshots[s]));
    double acc = 0.0;
    for (std::size_t i = 0; i < prof.omega0.size(); ++i)
      acc += std::norm(prof.omega0.values[i]) * std::pow(prof.psi(r, i), 2.0);
    profile.push_back(std::sqrt(acc * prof.omega0.grid.cell_volume()));
  }
  if (rs.size() < 20)
    throw Error("l2_rate_check: fewer than 20 snapshots in the last decade of 1 - bt");
  res.solver = fit_power_law(rs, solver);
  res.profile = fit_power_law(rs, profile);
  return res;
}

ProfileAlgebraResult profile_algebra(const Trajectory& traj, const ProfileSet& prof)
{
  const auto& p = prof.params;
  ProfileAlgebraResult res;
  for (const auto& snap : traj.snapshots)
  {
    const double r = 1.0 - p.b * snap.time;
    const Field w = prof.omega(snap);
    const double vmax = sup_norm(snap);
    if (!(vmax > 0.0))
      continue;
    for (std::size_t i = 0; i < w.size(); ++i)
    {
      const cplx v = snap.values[i];
      const double psi = prof.psi(r, i);
      res.modulus_defect = std::max(res.modulus_defect, std::abs(std::abs(w.values[i]) * psi - std::abs(v)) / vmax);
      if (std::abs(v) > 0.0)
      {
        const cplx back = w.values[i] * std::polar(1.0, prof.theta(r, i)) * std::conj(v);
        res.phase_defect = std::max(res.phase_defect, std::abs(std::arg(back)));
      }
    }
  }

  const Grid& g = prof.omega0.grid;
  bool sandwich = true;
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    res.f0_sup = std::max(res.f0_sup, std::abs(prof.f0[i]));
    if (!in_inner_box(g, i, 0.5) || prof.v0_mag_alpha[i] == 0.0)
      continue;
    const double v0a = prof.v0_mag_alpha[i];
    const double w0a = std::pow(std::abs(prof.omega0.values[i]), p.alpha);
    res.omega0_defect = std::max(res.omega0_defect, std::abs(w0a * (1.0 + prof.f0[i]) - v0a) / v0a);
    if (!(w0a >= 2.0 / 3.0 * v0a && w0a <= 2.0 * v0a))
      sandwich = false;
  }
  res.sandwich_applicable = res.f0_sup <= 0.5;
  res.sandwich_holds = sandwich;
  return res;
}

double physical_psi(const ProfileSet& prof, double t, std::size_t i)
{
  const auto& p = prof.params;
  const double num = 1.0 + prof.f0[i];
  const double c = 2.0 * p.alpha * std::abs(p.lambda_re) / (p.b * (2.0 - p.dim * p.alpha));
  const double bracket = std::pow(1.0 + p.b * t, p.nu()) - 1.0;
  return std::pow(num / (num + c * prof.v0_mag_alpha[i] * bracket), 1.0 / p.alpha);
}

Field physical_profile_z(const ProfileSet& prof, double t, const Grid& target)
{
  const auto& p = prof.params;
  if (t < 0.0)
    throw Error("physical_profile_z: t must be >= 0");
  if (prof.initial_distance != 1.0)
    throw Error("physical_profile_z: profiles must be built from t = 0");
  const double grow = 1.0 + p.b * t;
  const double scale = 1.0 / grow;

  Field f0(prof.omega0.grid, 0.0);
  for (std::size_t i = 0; i < f0.size(); ++i)
    f0.values[i] = prof.f0[i];
  const Field w = resample(prof.omega0, scale, target);
  const Field f = resample(f0, scale, target);
  const Field v0 = resample(prof.v0, scale, target);

  // (1-bs)^{-nu} - 1 at s = t/(1+bt) equals (1+bt)^{nu} - 1
  const double coeff = bracket_coefficient(p, 1.0, scale);
  const double amp = std::pow(grow, -0.5 * p.dim);
  Field z(target, t);
  for (std::size_t i = 0; i < z.size(); ++i)
  {
    const double num = 1.0 + f.values[i].real();
    const double v0a = std::pow(std::abs(v0.values[i]), p.alpha);
    const double Psi = std::pow(num / (num + coeff * v0a), 1.0 / p.alpha);
    const double Theta = p.b * target.radius_squared(i) / (4.0 * grow)
                         + (p.lambda_im != 0.0 ? p.lambda_im / p.lambda_re * std::log(Psi) : 0.0);
    z.values[i] = amp * std::polar(Psi, Theta) * w.values[i];
  }
  return z;
}

} // namespace pcnls
