#pragma once

#include "pcnls/domain_core.hpp"
#include "pcnls/grid.hpp"
#include "pcnls/integrator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcnls
{

/// Weighted derivative seminorms of one field.  The three families are
/// stored for every l in 0..J following their definitions (zero below the
/// start of families 2 and 3).
struct SeminormTable
{
  double t = 0.0;
  /// sup_{|beta| <= l} || <x>^n D^beta v ||_inf
  std::vector<double> fam1;
  /// sup_{2m+1 <= |beta| <= l} || <x>^n D^beta v ||_2
  std::vector<double> fam2;
  /// sup_{2m+3+k <= |beta| <= l} || <x>^{J-l} D^beta v ||_2
  std::vector<double> fam3;
  double x_norm = 0.0;
  /// inf over the grid of <x>^n |v|
  double inf_weighted = 0.0;
  double spectral_tail = 0.0;
  std::vector<std::string> warnings;
};

/// Largest derivative order the monitor will evaluate.
inline constexpr int kMaxMonitorOrder = 16;

SeminormTable seminorms(const Field& f, const IndexSet& idx);

struct MonitorRow
{
  double t = 0.0;
  double distance = 1.0;
  double phi1 = 0.0, phi2 = 0.0, phi3 = 0.0, phi4 = 0.0;
  /// running max of Psi up to this snapshot
  double psi_running = 0.0;
  bool bound_4K_ok = true;
  /// pointwise decay bound on ||v||_inf^alpha (t > 0 only)
  bool decay_bound_ok = true;
};

struct MonitorReport
{
  double Phi1 = 0.0, Phi2 = 0.0, Phi3 = 0.0, Phi4 = 0.0;
  double PhiT = 0.0;
  double PsiT = 0.0;
  bool bound_4K_ok = true;
  std::optional<double> first_violation_time;
  /// Whether b >= b0, i.e. whether the decay bound is a theorem here.
  bool decay_bound_applicable = false;
  std::vector<MonitorRow> rows;
  std::vector<SeminormTable> tables;
};

/// Right-hand side of the pointwise decay bound on ||v(t)||_inf^alpha.
double decay_bound(double distance, const ModelParams& p);

MonitorReport monitors(const Trajectory& traj, const SigmaSchedule& sched, const IndexSet& idx);

/// Same from precomputed tables (one per snapshot, with distances 1 - b t).
MonitorReport monitors_from_tables(std::vector<SeminormTable> tables,
                                   const std::vector<double>& sup_norms,
                                   const ModelParams& p, const SigmaSchedule& sched,
                                   const IndexSet& idx);

} // namespace pcnls
