#include "pcnls/seminorm.hpp"

#include "pcnls/error.hpp"
#include "pcnls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcnls
{

SeminormTable seminorms(const Field& f, const IndexSet& idx)
{
  const int J = idx.J;
  if (J > kMaxMonitorOrder)
    throw Error("seminorms: J exceeds the usable derivative order");
  const Grid& g = f.grid;
  const std::size_t size = g.size();
  const double cell = g.cell_volume();
  const int n = idx.n;
  const int m2 = 2 * idx.m;
  const int start3 = m2 + 3 + idx.k;

  // <x>^w for w = 0..n at every node
  std::vector<std::vector<double>> weight(static_cast<std::size_t>(n + 1), std::vector<double>(size));
  for (std::size_t i = 0; i < size; ++i)
  {
    const double jx = japanese(g, i);
    double w = 1.0;
    for (int p = 0; p <= n; ++p)
    {
      weight[p][i] = w;
      w *= jx;
    }
  }

  const auto J1 = static_cast<std::size_t>(J + 1);
  std::vector<double> sup_n(J1, 0.0);                                      // max over beta of order j
  std::vector<std::vector<double>> l2max(J1, std::vector<double>(n + 1, 0.0)); // max over beta
  std::vector<std::vector<double>> l2sum(J1, std::vector<double>(n + 1, 0.0)); // sum over beta

  std::vector<double> sq(n + 1);
  for (int j = 0; j <= J; ++j)
  {
    for (const auto& beta : multi_indices_of_order(g.dim(), j))
    {
      const Field d = derivative(f, beta, J);
      double s = 0.0;
      std::fill(sq.begin(), sq.end(), 0.0);
      for (std::size_t i = 0; i < size; ++i)
      {
        const double a = std::abs(d.values[i]);
        s = std::max(s, weight[n][i] * a);
        const double a2 = a * a;
        for (int p = 0; p <= n; ++p)
          sq[p] += weight[p][i] * weight[p][i] * a2;
      }
      sup_n[j] = std::max(sup_n[j], s);
      for (int p = 0; p <= n; ++p)
      {
        const double l2 = std::sqrt(sq[p] * cell);
        l2max[j][p] = std::max(l2max[j][p], l2);
        l2sum[j][p] += l2;
      }
    }
  }

  SeminormTable t;
  t.t = f.time;
  t.fam1.assign(J1, 0.0);
  t.fam2.assign(J1, 0.0);
  t.fam3.assign(J1, 0.0);
  double running = 0.0;
  for (int l = 0; l <= J; ++l)
  {
    running = std::max(running, sup_n[l]);
    t.fam1[l] = running;
  }
  running = 0.0;
  for (int l = m2 + 1; l <= J; ++l)
  {
    running = std::max(running, l2max[l][n]);
    t.fam2[l] = running;
  }
  for (int l = start3; l <= J; ++l)
  {
    double s = 0.0;
    for (int j = start3; j <= l; ++j)
      s = std::max(s, l2max[j][J - l]);
    t.fam3[l] = s;
  }

  double xn = 0.0;
  for (int c = 0; c <= m2; ++c)
    xn += sup_n[c];
  for (int p = 0; p <= idx.k + 1; ++p)
    for (int s = 0; s <= n; ++s)
      xn += l2sum[p + s + m2 + 1][n - s];
  t.x_norm = xn;

  double inf_w = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size; ++i)
    inf_w = std::min(inf_w, weight[n][i] * std::abs(f.values[i]));
  t.inf_weighted = inf_w;

  t.spectral_tail = spectral_tail_ratio(f);
  if (t.spectral_tail > 1e-8)
    t.warnings.push_back("spectral tail above 1e-8 of peak; high-order derivatives unreliable");
  return t;
}

double decay_bound(double distance, const ModelParams& p)
{
  const double nu = p.nu();
  const double rn = std::pow(distance, nu);
  return p.b * nu / (p.alpha * std::abs(p.lambda_re)) * rn / (1.0 - rn);
}

MonitorReport monitors_from_tables(std::vector<SeminormTable> tables,
                                   const std::vector<double>& sup_norms, const ModelParams& p,
                                   const SigmaSchedule& sched, const IndexSet& idx)
{
  if (tables.empty())
    throw Error("monitors: empty trajectory");
  if (sched.J() != idx.J)
    throw Error("monitors: schedule length does not match J");
  const int m2 = 2 * idx.m;
  const int end2 = m2 + 2 + idx.k;

  MonitorReport rep;
  rep.decay_bound_applicable = p.b >= threshold_b0(p.dim, p.K);
  for (std::size_t s = 0; s < tables.size(); ++s)
  {
    const auto& tab = tables[s];
    MonitorRow row;
    row.t = tab.t;
    row.distance = 1.0 - p.b * tab.t;
    const double r = row.distance;
    for (int j = 0; j <= m2; ++j)
      row.phi1 = std::max(row.phi1, std::pow(r, sched[j]) * tab.fam1[j]);
    for (int j = m2 + 1; j <= end2; ++j)
      row.phi2 = std::max(row.phi2, std::pow(r, sched[j]) * tab.fam2[j]);
    for (int j = end2 + 1; j <= idx.J; ++j)
      row.phi3 = std::max(row.phi3, std::pow(r, sched[j]) * tab.fam3[j]);
    if (!(tab.inf_weighted > 0.0))
      throw Error("monitors: inf <x>^n |v| vanished; Phi4 undefined");
    row.phi4 = std::pow(r, sched[1]) / tab.inf_weighted;

    rep.Phi1 = std::max(rep.Phi1, row.phi1);
    rep.Phi2 = std::max(rep.Phi2, row.phi2);
    rep.Phi3 = std::max(rep.Phi3, row.phi3);
    rep.Phi4 = std::max(rep.Phi4, row.phi4);
    row.psi_running = std::max({rep.Phi1, rep.Phi2, rep.Phi3, rep.Phi4});
    row.bound_4K_ok = row.psi_running <= 4.0 * p.K;
    if (!row.bound_4K_ok && !rep.first_violation_time)
      rep.first_violation_time = row.t;
    if (tab.t > 0.0 && p.b > 0.0 && p.lambda_re < 0.0 && p.nu() > 0.0)
      row.decay_bound_ok = std::pow(sup_norms.at(s), p.alpha) <= decay_bound(r, p);
    rep.rows.push_back(row);
  }
  rep.PhiT = std::max({rep.Phi1, rep.Phi2, rep.Phi3});
  rep.PsiT = std::max(rep.PhiT, rep.Phi4);
  rep.bound_4K_ok = rep.PsiT <= 4.0 * p.K;
  rep.tables = std::move(tables);
  return rep;
}

MonitorReport monitors(const Trajectory& traj, const SigmaSchedule& sched, const IndexSet& idx)
{
  std::vector<SeminormTable> tables;
  std::vector<double> sups;
  tables.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots)
  {
    tables.push_back(seminorms(snap, idx));
    sups.push_back(sup_norm(snap));
  }
  return monitors_from_tables(std::move(tables), sups, traj.params, sched, idx);
}

} // namespace pcnls
